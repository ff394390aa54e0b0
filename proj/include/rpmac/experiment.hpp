#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rpmac/analytics.hpp"
#include "rpmac/calibration.hpp"
#include "rpmac/config.hpp"
#include "rpmac/network.hpp"

namespace rpmac {

struct RunRecord {
  std::uint64_t seed = 0;
  RunSummary summary;
  std::vector<NcReport> ncs;
  std::vector<SimEvent> trace;
};

/// Runs seeds [first_seed, first_seed + trials). Seeds run in parallel; the
/// result is in seed order regardless.
std::vector<RunRecord> simulate(const ExperimentConfig& cfg, std::uint64_t first_seed, std::uint64_t trials,
                                const RunHooks& hooks = {});

struct CompareRow {
  Protocol protocol = Protocol::RPmac;
  std::size_t stas = 0;
  double layers = 0;
  double mean_time_us = 0;
  double analytic_time_us = 0;
};

/// Every protocol in `protocols` on the configured topology family with
/// `topology.stas` set to each N in `sizes`.
std::vector<CompareRow> compare(const ExperimentConfig& cfg, const std::vector<Protocol>& protocols,
                                const std::vector<std::size_t>& sizes, std::uint64_t first_seed, std::uint64_t trials);

struct SweepRow {
  std::uint64_t nodes = 0;
  std::uint64_t slots = 0;
  double ratio = 0;
};

std::vector<SweepRow> sweep_pte(const std::vector<std::uint64_t>& sizes, const std::vector<double>& slot_ratios,
                                std::uint64_t trials, std::uint64_t seed);

struct RobustnessRow {
  bool robust = true;
  std::uint64_t seed = 0;
  double lost_sta_ratio = 0;
  std::size_t duplicate_sid_incidents = 0;
};

/// Both arms (robustness on, then off) over the same seeds.
std::vector<RobustnessRow> robustness(const ExperimentConfig& cfg, std::uint64_t first_seed, std::uint64_t trials);

// CSV writers. Column sets are fixed.
void write_calibration_csv(std::ostream& out, const DelayProfile& profile);
/// protocol,N,seed,layers,networking_time_us,elapsed_us,ncs,online,data_frames,
/// lost_sta_ratio,duplicate_sid_incidents,retransmissions,abandoned_rounds
/// followed by one row with seed "mean".
void write_summary_csv(std::ostream& out, const std::vector<RunRecord>& runs);
/// seed,nc,newly_online,data_frames,TDF,MAF,SDF,ACK,POLL,control_frames,NET,REQ,start_us,end_us
void write_nc_csv(std::ostream& out, const std::vector<RunRecord>& runs);
void write_compare_csv(std::ostream& out, const std::vector<CompareRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// protocol,N,p,T_PTE,T_CSMA,T_data,expected_us
void write_analytic_csv(std::ostream& out, const std::vector<Protocol>& protocols, const std::vector<std::uint64_t>& sizes,
                        double p, const TimingTable& timing);
/// arm,seed,lost_sta_ratio,duplicate_sid_incidents then one "mean" row per arm.
void write_robustness_csv(std::ostream& out, const std::vector<RobustnessRow>& rows);

}  // namespace rpmac
