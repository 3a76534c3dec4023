#include "lesioneval/ranking.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace lesioneval {

std::string column_name(const RankColumn &column) {
  return std::string(to_string(column.region)) +
         (column.metric == Metric::Dice ? "_DSC" : "_HD95");
}

namespace {

double metric_value(const TeamCaseRecord &r, Metric metric) {
  return metric == Metric::Dice ? r.lesionwise_dice : r.lesionwise_hd95;
}

void check_coverage(std::span<const TeamCaseRecord> records) {
  std::set<std::string> teams;
  std::set<std::pair<std::string, Region>> slots;
  std::set<std::tuple<std::string, std::string, Region>> seen;
  for (const auto &r : records) {
    teams.insert(r.team);
    slots.insert({r.case_id, r.region});
    if (!seen.insert({r.team, r.case_id, r.region}).second)
      throw Error(ErrorCode::Coverage, "duplicate record for team '" + r.team +
                                           "', case '" + r.case_id + "', " +
                                           std::string(to_string(r.region)));
  }
  std::ostringstream gaps;
  std::size_t missing = 0;
  for (const auto &team : teams)
    for (const auto &[case_id, region] : slots)
      if (!seen.contains({team, case_id, region})) {
        if (missing++ < 20)
          gaps << (missing > 1 ? "; " : "") << team << '/' << case_id << '/'
               << to_string(region);
      }
  if (missing > 0) {
    if (missing > 20)
      gaps << "; ... (" << missing << " total)";
    throw Error(ErrorCode::Coverage, "incomplete coverage: " + gaps.str());
  }
}

RankingTable finish(RankMode mode, std::vector<TeamStanding> standings) {
  std::map<std::string, double> scores;
  for (auto &s : standings) {
    s.score = segmentation_score(s.ranks);
    scores[s.team] = s.score;
  }
  const auto order = final_ranking(scores);
  std::map<std::string, TeamStanding> by_team;
  for (auto &s : standings)
    by_team[s.team] = std::move(s);
  RankingTable table;
  table.mode = mode;
  for (const auto &entry : order) {
    TeamStanding s = std::move(by_team[entry.team]);
    s.tied = entry.tied;
    table.standings.push_back(std::move(s));
  }
  return table;
}

} // namespace

double aggregate_team_metric(std::span<const TeamCaseRecord> records,
                             const std::string &team, Region region,
                             Metric metric) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto &r : records)
    if (r.team == team && r.region == region) {
      sum += metric_value(r, metric);
      ++n;
    }
  if (n == 0)
    throw Error(ErrorCode::MissingTeam, "no " + std::string(to_string(region)) +
                                            " records for team '" + team + "'");
  return sum / static_cast<double>(n);
}

std::vector<double> rank_metric(std::span<const double> values, Metric metric) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    return metric == Metric::Dice ? values[a] > values[b]
                                  : values[a] < values[b];
  };
  std::stable_sort(order.begin(), order.end(), better);
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]])
      ++j;
    // positions i..j-1 hold ranks i+1..j
    const double shared = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

double segmentation_score(std::span<const double> ranks) {
  if (ranks.size() != kRankColumns)
    throw Error(ErrorCode::Arity, "segmentation score needs exactly 6 ranks, got " +
                                      std::to_string(ranks.size()));
  return std::accumulate(ranks.begin(), ranks.end(), 0.0) /
         static_cast<double>(kRankColumns);
}

std::vector<LeaderboardEntry>
final_ranking(const std::map<std::string, double> &scores) {
  std::vector<LeaderboardEntry> out;
  for (const auto &[team, score] : scores)
    out.push_back({team, score, false});
  // std::map iteration is already lexicographic, so a stable sort keeps
  // equal scores in team-name order.
  std::stable_sort(out.begin(), out.end(),
                   [](const auto &a, const auto &b) { return a.score < b.score; });
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (out[i].score == out[i + 1].score)
      out[i].tied = out[i + 1].tied = true;
  return out;
}

RankingTable
rank_aggregates(const std::map<std::string, std::array<double, kRankColumns>>
                    &aggregates) {
  std::vector<TeamStanding> standings;
  for (const auto &[team, values] : aggregates)
    standings.push_back({team, values, {}, 0.0, false});
  for (std::size_t c = 0; c < kRankColumns; ++c) {
    std::vector<double> column;
    for (const auto &s : standings)
      column.push_back(s.aggregates[c]);
    const auto ranks = rank_metric(column, kColumns[c].metric);
    for (std::size_t t = 0; t < standings.size(); ++t)
      standings[t].ranks[c] = ranks[t];
  }
  return finish(RankMode::Aggregate, std::move(standings));
}

RankingTable build_ranking(std::span<const TeamCaseRecord> records,
                           RankMode mode) {
  if (records.empty())
    throw Error(ErrorCode::EmptyInput, "no records to rank");
  check_coverage(records);

  std::set<std::string> team_set;
  for (const auto &r : records)
    team_set.insert(r.team);
  const std::vector<std::string> teams(team_set.begin(), team_set.end());

  std::map<std::string, std::array<double, kRankColumns>> aggregates;
  for (const auto &team : teams)
    for (std::size_t c = 0; c < kRankColumns; ++c)
      aggregates[team][c] = aggregate_team_metric(records, team, kColumns[c].region,
                                                  kColumns[c].metric);
  if (mode == RankMode::Aggregate)
    return rank_aggregates(aggregates);

  // Per-case mode: rank teams within every (case, column) and average.
  std::map<std::string, std::size_t> team_index;
  for (std::size_t t = 0; t < teams.size(); ++t)
    team_index[teams[t]] = t;
  std::map<std::pair<std::string, Region>, std::vector<const TeamCaseRecord *>>
      by_slot;
  for (const auto &r : records)
    by_slot[{r.case_id, r.region}].push_back(&r);

  std::vector<std::array<double, kRankColumns>> rank_sum(teams.size());
  std::array<std::size_t, 3> cases_per_region{};
  for (const auto &[slot, recs] : by_slot) {
    ++cases_per_region[static_cast<int>(slot.second)];
    for (std::size_t c = 0; c < kRankColumns; ++c) {
      if (kColumns[c].region != slot.second)
        continue;
      std::vector<double> values;
      for (const auto *r : recs)
        values.push_back(metric_value(*r, kColumns[c].metric));
      const auto ranks = rank_metric(values, kColumns[c].metric);
      for (std::size_t k = 0; k < recs.size(); ++k)
        rank_sum[team_index[recs[k]->team]][c] += ranks[k];
    }
  }
  std::vector<TeamStanding> standings;
  for (std::size_t t = 0; t < teams.size(); ++t) {
    TeamStanding s{teams[t], aggregates[teams[t]], {}, 0.0, false};
    for (std::size_t c = 0; c < kRankColumns; ++c) {
      const auto n = cases_per_region[static_cast<int>(kColumns[c].region)];
      s.ranks[c] = n ? rank_sum[t][c] / static_cast<double>(n) : 0.0;
    }
    standings.push_back(std::move(s));
  }
  return finish(RankMode::PerCase, std::move(standings));
}

} // namespace lesioneval
