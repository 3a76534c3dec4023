/**
 * @file ranking.hpp
 * @brief Team aggregation, per-metric ranking and the segmentation score.
 *
 * Six rank columns are produced: lesion-wise Dice and HD95 for each of ET, TC
 * and WT. A team's segmentation score is the mean of its six ranks, and the
 * leaderboard orders teams by ascending score.
 */
#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lesioneval/volume.hpp"

namespace lesioneval {

enum class Metric { Dice, HD95 };

struct TeamCaseRecord {
  std::string team;
  std::string case_id;
  Region region = Region::ET;
  double lesionwise_dice = 0.0;
  double lesionwise_hd95 = 0.0;
};

enum class RankMode {
  Aggregate, ///< rank per-team means across cases
  PerCase,   ///< rank every case separately, then average the ranks
};

/// Column order: ET/TC/WT Dice, then ET/TC/WT HD95.
inline constexpr std::size_t kRankColumns = 6;
struct RankColumn {
  Region region;
  Metric metric;
};
inline constexpr std::array<RankColumn, kRankColumns> kColumns{{
    {Region::ET, Metric::Dice},
    {Region::TC, Metric::Dice},
    {Region::WT, Metric::Dice},
    {Region::ET, Metric::HD95},
    {Region::TC, Metric::HD95},
    {Region::WT, Metric::HD95},
}};
std::string column_name(const RankColumn &column);

struct TeamStanding {
  std::string team;
  std::array<double, kRankColumns> aggregates{};
  std::array<double, kRankColumns> ranks{};
  double score = 0.0;
  bool tied = false;
};

struct RankingTable {
  RankMode mode = RankMode::Aggregate;
  std::vector<TeamStanding> standings; // leaderboard order
};

/// Mean of `metric` for `team` over all of its records for `region`.
/// Throws Error(MissingTeam) if the team has no such records.
double aggregate_team_metric(std::span<const TeamCaseRecord> records,
                             const std::string &team, Region region,
                             Metric metric);

/// Rank 1 is best; higher is better for Dice and lower for HD95. Ties share
/// the average of the ranks they span.
std::vector<double> rank_metric(std::span<const double> values, Metric metric);

/// Mean of exactly six ranks; Error(Arity) otherwise.
double segmentation_score(std::span<const double> ranks);

struct LeaderboardEntry {
  std::string team;
  double score = 0.0;
  bool tied = false;
};

/// Ascending score; equal scores are ordered by team name and flagged tied.
std::vector<LeaderboardEntry>
final_ranking(const std::map<std::string, double> &scores);

/// Full pipeline. Every team must have a record for every (case, region)
/// present in the cohort, otherwise Error(Coverage) lists the gaps.
RankingTable build_ranking(std::span<const TeamCaseRecord> records,
                           RankMode mode = RankMode::Aggregate);

/// Ranks precomputed aggregate values (one row of six values per team).
RankingTable
rank_aggregates(const std::map<std::string, std::array<double, kRankColumns>>
                    &aggregates);

} // namespace lesioneval
