#include "rpmac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace rpmac {

namespace {

/// Runs fn(i) for i in [0, count) on a small thread pool.
template <typename Fn>
void parallel_for(std::size_t count, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::string fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::uint64_t count_of(const Counts& c, const std::string& key) {
  const auto it = c.find(key);
  return it == c.end() ? 0 : it->second;
}

}  // namespace

std::vector<RunRecord> simulate(const ExperimentConfig& cfg, std::uint64_t first_seed, std::uint64_t trials,
                                const RunHooks& hooks) {
  validate(cfg);
  std::vector<RunRecord> runs(trials);
  parallel_for(trials, [&](std::size_t i) {
    const std::uint64_t seed = first_seed + i;
    const Topology topo = build_topology(cfg, seed);
    auto result = run_networking(topo, cfg.network, seed, hooks);
    runs[i] = {seed, std::move(result.summary), std::move(result.ncs), std::move(result.trace)};
  });
  return runs;
}

std::vector<CompareRow> compare(const ExperimentConfig& cfg, const std::vector<Protocol>& protocols,
                                const std::vector<std::size_t>& sizes, std::uint64_t first_seed, std::uint64_t trials) {
  std::vector<CompareRow> rows;
  for (Protocol protocol : protocols) {
    for (std::size_t n : sizes) {
      ExperimentConfig c = cfg;
      c.network.protocol = protocol;
      c.topology.stas = n;
      if (c.topology.generator == "chain-of-stars") {
        c.topology.per_layer = std::max<std::size_t>(1, n / std::max<std::size_t>(1, c.topology.layers - 1));
      }
      const auto runs = simulate(c, first_seed, trials);
      CompareRow row;
      row.protocol = protocol;
      row.stas = n;
      for (const auto& r : runs) {
        row.layers += static_cast<double>(r.summary.layers);
        row.mean_time_us += static_cast<double>(r.summary.networking_time);
      }
      row.layers /= static_cast<double>(runs.size());
      row.mean_time_us /= static_cast<double>(runs.size());
      row.analytic_time_us = expected_networking_time(protocol, n, c.network.p, c.network.timing);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SweepRow> sweep_pte(const std::vector<std::uint64_t>& sizes, const std::vector<double>& slot_ratios,
                                std::uint64_t trials, std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (auto n : sizes) {
    for (double r : slot_ratios) {
      const auto m = static_cast<std::uint64_t>(std::llround(r * static_cast<double>(n)));
      rows.push_back({n, std::max<std::uint64_t>(1, m), 0.0});
    }
  }
  parallel_for(rows.size(), [&](std::size_t i) { rows[i].ratio = monte_carlo_pte(rows[i].nodes, rows[i].slots, trials, seed); });
  return rows;
}

std::vector<RobustnessRow> robustness(const ExperimentConfig& cfg, std::uint64_t first_seed, std::uint64_t trials) {
  std::vector<RobustnessRow> rows;
  for (bool robust : {true, false}) {
    ExperimentConfig c = cfg;
    c.network.robustness = {robust, robust};
    for (const auto& r : simulate(c, first_seed, trials)) {
      rows.push_back({robust, r.seed, r.summary.lost_sta_ratio, r.summary.duplicate_sid_incidents});
    }
  }
  return rows;
}

void write_calibration_csv(std::ostream& out, const DelayProfile& p) {
  out << "T_P,R_P,R_M,tau\n" << p.tx_delay << ',' << p.rx_delay << ',' << p.transport_delay << ',' << p.tau << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << "protocol,N,seed,layers,networking_time_us,elapsed_us,ncs,online,data_frames,lost_sta_ratio,"
         "duplicate_sid_incidents,retransmissions,abandoned_rounds\n";
  double sums[11] = {};
  for (const auto& r : runs) {
    const auto& s = r.summary;
    out << protocol_name(s.protocol) << ',' << s.stas << ',' << r.seed << ',' << s.layers << ',' << s.networking_time
        << ',' << s.elapsed << ',' << s.ncs << ',' << s.online << ',' << s.data_frames << ',' << fixed(s.lost_sta_ratio, 6)
        << ',' << s.duplicate_sid_incidents << ',' << s.retransmissions << ',' << s.abandoned_rounds << '\n';
    const double v[11] = {static_cast<double>(s.layers),          static_cast<double>(s.networking_time),
                          static_cast<double>(s.elapsed),         static_cast<double>(s.ncs),
                          static_cast<double>(s.online),          static_cast<double>(s.data_frames),
                          s.lost_sta_ratio,                       static_cast<double>(s.duplicate_sid_incidents),
                          static_cast<double>(s.retransmissions), static_cast<double>(s.abandoned_rounds),
                          0.0};
    for (int i = 0; i < 11; ++i) sums[i] += v[i];
  }
  if (runs.empty()) return;
  const double n = static_cast<double>(runs.size());
  const auto& first = runs.front().summary;
  out << protocol_name(first.protocol) << ',' << first.stas << ",mean";
  const int digits[10] = {2, 1, 1, 2, 2, 1, 6, 2, 2, 2};
  for (int i = 0; i < 10; ++i) out << ',' << fixed(sums[i] / n, digits[i]);
  out << '\n';
}

void write_nc_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << "seed,nc,newly_online,data_frames,TDF,MAF,SDF,ACK,POLL,control_frames,NET,REQ,start_us,end_us\n";
  for (const auto& r : runs) {
    for (const auto& nc : r.ncs) {
      const std::uint64_t local = count_of(nc.frames, "TDF") + count_of(nc.frames, "MAF") + count_of(nc.frames, "SDF") +
                                  count_of(nc.frames, "ACK") + count_of(nc.frames, "Poll");
      out << r.seed << ',' << nc.nc_index << ',' << nc.newly_online.size() << ',' << nc.data_frames() << ','
          << count_of(nc.frames, "TDF") << ',' << count_of(nc.frames, "MAF") << ',' << count_of(nc.frames, "SDF") << ','
          << count_of(nc.frames, "ACK") << ',' << count_of(nc.frames, "Poll") << ',' << nc.data_frames() - local << ','
          << count_of(nc.preambles, "NET") << ',' << count_of(nc.preambles, "REQ") << ',' << nc.start << ',' << nc.end
          << '\n';
    }
  }
}

void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "protocol,N,layers,meanTime_us,analyticTime_us\n";
  for (const auto& r : rows) {
    out << protocol_name(r.protocol) << ',' << r.stas << ',' << fixed(r.layers, 2) << ',' << fixed(r.mean_time_us, 1)
        << ',' << fixed(r.analytic_time_us, 1) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "N,M,ratio\n";
  for (const auto& r : rows) out << r.nodes << ',' << r.slots << ',' << fixed(r.ratio, 6) << '\n';
}

void write_analytic_csv(std::ostream& out, const std::vector<Protocol>& protocols, const std::vector<std::uint64_t>& sizes,
                        double p, const TimingTable& t) {
  out << "protocol,N,p,T_PTE,T_CSMA,T_data,expected_us\n";
  for (Protocol protocol : protocols) {
    for (auto n : sizes) {
      out << protocol_name(protocol) << ',' << n << ',' << p << ',' << t.pte_slot << ',' << t.csma_slot << ','
          << t.data_slot << ',' << fixed(expected_networking_time(protocol, n, p, t), 1) << '\n';
    }
  }
}

void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows) {
  out << "arm,seed,lost_sta_ratio,duplicate_sid_incidents\n";
  for (bool robust : {true, false}) {
    double lost = 0;
    std::size_t dups = 0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.robust != robust) continue;
      out << (robust ? "on" : "off") << ',' << r.seed << ',' << fixed(r.lost_sta_ratio, 6) << ','
          << r.duplicate_sid_incidents << '\n';
      lost += r.lost_sta_ratio;
      dups += r.duplicate_sid_incidents;
      ++n;
    }
    if (n > 0) {
      out << (robust ? "on" : "off") << ",mean," << fixed(lost / static_cast<double>(n), 6) << ',' << dups << '\n';
    }
  }
}

}  // namespace rpmac
