#include <doctest.h>

#include <cstdio>
#include <random>

#include "lesioneval/ranking.hpp"

using namespace lesioneval;

namespace {

using Row = std::array<double, kRankColumns>;

std::vector<TeamCaseRecord> random_cohort(std::mt19937_64 &rng, std::size_t teams,
                                          std::size_t cases) {
  std::uniform_real_distribution<double> d(0.0, 1.0), h(0.0, 374.0);
  std::vector<TeamCaseRecord> out;
  for (std::size_t t = 0; t < teams; ++t)
    for (std::size_t c = 0; c < cases; ++c)
      for (Region r : kAllRegions)
        out.push_back({"team" + std::to_string(t), "case" + std::to_string(c), r,
                       d(rng), h(rng)});
  return out;
}

const TeamStanding &standing(const RankingTable &t, const std::string &team) {
  for (const auto &s : t.standings)
    if (s.team == team)
      return s;
  throw std::runtime_error("team not found: " + team);
}

} // namespace

TEST_CASE("aggregate_team_metric") {
  std::vector<TeamCaseRecord> recs{{"A", "c1", Region::ET, 0.8, 10.0},
                                   {"A", "c2", Region::ET, 1.0, 20.0},
                                   {"B", "c1", Region::ET, 0.5, 5.0}};
  CHECK(aggregate_team_metric(recs, "A", Region::ET, Metric::Dice) ==
        doctest::Approx(0.9).epsilon(1e-15));
  CHECK(aggregate_team_metric(recs, "A", Region::ET, Metric::HD95) == 15.0);
  CHECK_THROWS_AS(aggregate_team_metric(recs, "C", Region::ET, Metric::Dice), Error);
  CHECK_THROWS_AS(aggregate_team_metric(recs, "A", Region::WT, Metric::Dice), Error);

  std::vector<TeamCaseRecord> flat;
  for (int c = 0; c < 7; ++c)
    flat.push_back({"A", "c" + std::to_string(c), Region::TC, 0.625, 12.5});
  CHECK(aggregate_team_metric(flat, "A", Region::TC, Metric::Dice) == 0.625);

  std::mt19937_64 rng(31);
  const auto cohort = random_cohort(rng, 4, 25);
  for (int t = 0; t < 4; ++t)
    for (Region r : kAllRegions) {
      const std::string team = "team" + std::to_string(t);
      double sum = 0.0;
      int n = 0;
      for (const auto &rec : cohort)
        if (rec.team == team && rec.region == r) {
          sum += rec.lesionwise_hd95;
          ++n;
        }
      CHECK(aggregate_team_metric(cohort, team, r, Metric::HD95) ==
            doctest::Approx(sum / n).epsilon(1e-12));
    }
}

TEST_CASE("rank_metric examples and ties") {
  const std::vector<double> dsc{0.9, 0.8, 0.7};
  CHECK(rank_metric(dsc, Metric::Dice) == std::vector<double>{1, 2, 3});
  const std::vector<double> hd{20, 30};
  CHECK(rank_metric(hd, Metric::HD95) == std::vector<double>{1, 2});
  const std::vector<double> tie{0.9, 0.9, 0.8};
  CHECK(rank_metric(tie, Metric::Dice) == std::vector<double>{1.5, 1.5, 3});
  const std::vector<double> all_same{5, 5, 5, 5};
  CHECK(rank_metric(all_same, Metric::HD95) == std::vector<double>{2.5, 2.5, 2.5, 2.5});
  const std::vector<double> mixed{3, 1, 3, 2, 1};
  CHECK(rank_metric(mixed, Metric::HD95) == std::vector<double>{4.5, 1.5, 4.5, 3, 1.5});
}

TEST_CASE("segmentation score") {
  const std::vector<double> worked{3, 2, 3, 3, 2, 4};
  const double s = segmentation_score(worked);
  CHECK(std::fabs(s - 2.8333) <= 0.0005);
  CHECK(s == doctest::Approx(17.0 / 6.0).epsilon(1e-15));
  char shown[16];
  std::snprintf(shown, sizeof shown, "%.2f", s);
  CHECK(std::string(shown) == "2.83");
  std::snprintf(shown, sizeof shown, "%.4f", s);
  CHECK(std::string(shown) == "2.8333");

  const std::vector<double> ones(6, 1.0), twos(6, 2.0);
  CHECK(segmentation_score(ones) == 1.0);
  CHECK(segmentation_score(twos) == 2.0);
  const std::vector<double> five(5, 1.0);
  try {
    segmentation_score(five);
    FAIL("expected arity error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Arity);
  }
}

TEST_CASE("final ranking orders by score and flags ties") {
  auto order = final_ranking({{"B", 2.83}, {"A", 1.0}});
  REQUIRE(order.size() == 2);
  CHECK(order[0].team == "A");
  CHECK(order[1].team == "B");
  CHECK_FALSE(order[0].tied);

  order = final_ranking({{"zeta", 2.0}, {"alpha", 2.0}, {"mid", 1.5}});
  CHECK(order[0].team == "mid");
  CHECK_FALSE(order[0].tied);
  CHECK(order[1].team == "alpha");
  CHECK(order[2].team == "zeta");
  CHECK(order[1].tied);
  CHECK(order[2].tied);
}

TEST_CASE("nine-team leaderboard with one filler breaking the top three") {
  // DSC ET/TC/WT then HD95 ET/TC/WT for the three leading teams; six filler
  // teams trail on every column except one whose WT HD95 sits between the
  // second and third teams.
  std::map<std::string, Row> agg{
      {"NVAUTO", {0.899, 0.904, 0.871, 23.9, 21.8, 31.4}},
      {"CNMC", {0.876, 0.867, 0.851, 30.0, 31.7, 35.2}},
      {"blackbean", {0.870, 0.879, 0.845, 34.3, 29.9, 41.2}},
      {"filler1", {0.80, 0.80, 0.80, 50.0, 50.0, 38.0}},
      {"filler2", {0.79, 0.79, 0.79, 51.0, 51.0, 51.0}},
      {"filler3", {0.78, 0.78, 0.78, 52.0, 52.0, 52.0}},
      {"filler4", {0.77, 0.77, 0.77, 53.0, 53.0, 53.0}},
      {"filler5", {0.76, 0.76, 0.76, 54.0, 54.0, 54.0}},
      {"filler6", {0.60, 0.55, 0.70, 120.0, 110.0, 100.0}},
  };
  const auto table = rank_aggregates(agg);
  CHECK(standing(table, "NVAUTO").ranks == Row{1, 1, 1, 1, 1, 1});
  CHECK(standing(table, "CNMC").ranks == Row{2, 3, 2, 2, 3, 2});
  CHECK(standing(table, "blackbean").ranks == Row{3, 2, 3, 3, 2, 4});
  CHECK(standing(table, "blackbean").score == doctest::Approx(17.0 / 6.0));
  CHECK(standing(table, "CNMC").score == doctest::Approx(14.0 / 6.0));
  REQUIRE(table.standings.size() == 9);
  CHECK(table.standings[0].team == "NVAUTO");
  CHECK(table.standings[1].team == "CNMC");
  CHECK(table.standings[2].team == "blackbean");
  CHECK(table.standings[8].team == "filler6");
}

TEST_CASE("build_ranking coverage and modes") {
  std::vector<TeamCaseRecord> recs;
  for (const char *c : {"c1", "c2"})
    for (Region r : kAllRegions) {
      recs.push_back({"A", c, r, 0.9, 5.0});
      recs.push_back({"B", c, r, 0.7, 9.0});
    }
  const auto t = build_ranking(recs);
  CHECK(t.standings[0].team == "A");
  CHECK(t.standings[0].score == 1.0);
  CHECK(t.standings[1].score == 2.0);

  auto gap = recs;
  gap.pop_back();
  try {
    build_ranking(gap);
    FAIL("expected coverage error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Coverage);
    CHECK(std::string(e.what()).find("B/c2/WT") != std::string::npos);
  }
  auto dup = recs;
  dup.push_back(recs.front());
  CHECK_THROWS_AS(build_ranking(dup), Error);
  CHECK_THROWS_AS(build_ranking(std::vector<TeamCaseRecord>{}), Error);

  std::vector<TeamCaseRecord> single;
  for (Region r : kAllRegions)
    single.push_back({"solo", "c1", r, 0.3, 100.0});
  CHECK(build_ranking(single).standings.at(0).score == 1.0);
}

TEST_CASE("per-case mode averages per-case ranks") {
  // A wins case 1 on every column by a small margin, B wins case 2 by a large
  // margin: the aggregate favours B, per-case ranks tie.
  std::vector<TeamCaseRecord> recs;
  for (Region r : kAllRegions) {
    recs.push_back({"A", "c1", r, 0.80, 10.0});
    recs.push_back({"B", "c1", r, 0.79, 11.0});
    recs.push_back({"A", "c2", r, 0.20, 90.0});
    recs.push_back({"B", "c2", r, 0.90, 5.0});
  }
  const auto agg = build_ranking(recs, RankMode::Aggregate);
  CHECK(agg.standings[0].team == "B");
  CHECK(agg.standings[0].score == 1.0);
  const auto per = build_ranking(recs, RankMode::PerCase);
  CHECK(per.mode == RankMode::PerCase);
  for (const auto &s : per.standings) {
    CHECK(s.score == 1.5);
    CHECK(s.tied);
  }
  CHECK(per.standings[0].team == "A");
}

TEST_CASE("ranking properties on random cohorts") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t teams = 2 + trial % 6;
    const auto cohort = random_cohort(rng, teams, 3 + trial % 4);
    for (RankMode mode : {RankMode::Aggregate, RankMode::PerCase}) {
      const auto t = build_ranking(cohort, mode);
      REQUIRE(t.standings.size() == teams);
      const double T = static_cast<double>(teams);
      for (std::size_t c = 0; c < kRankColumns; ++c) {
        double sum = 0.0;
        for (const auto &s : t.standings)
          sum += s.ranks[c];
        CHECK(sum == doctest::Approx(T * (T + 1) / 2));
      }
      for (std::size_t i = 0; i < t.standings.size(); ++i) {
        CHECK(t.standings[i].score >= 1.0);
        CHECK(t.standings[i].score <= T);
        if (i > 0)
          CHECK(t.standings[i - 1].score <= t.standings[i].score);
      }
    }

    // Strictly increasing transforms of the metric values leave ranks alone.
    auto transformed = cohort;
    for (auto &r : transformed) {
      r.lesionwise_dice = std::exp(3.0 * r.lesionwise_dice);
      r.lesionwise_hd95 = std::sqrt(r.lesionwise_hd95) + 7.0;
    }
    const auto a = build_ranking(cohort, RankMode::PerCase);
    const auto b = build_ranking(transformed, RankMode::PerCase);
    for (std::size_t i = 0; i < teams; ++i) {
      CHECK(a.standings[i].team == b.standings[i].team);
      CHECK(a.standings[i].ranks == b.standings[i].ranks);
    }

    // A team worse on every metric ranks last without disturbing the others.
    std::map<std::string, Row> agg;
    for (const auto &s : build_ranking(cohort).standings)
      agg[s.team] = s.aggregates;
    const auto before = rank_aggregates(agg);
    agg["zz_worst"] = Row{-1, -1, -1, 1000, 1000, 1000};
    const auto after = rank_aggregates(agg);
    CHECK(after.standings.back().team == "zz_worst");
    CHECK(after.standings.back().score == static_cast<double>(teams + 1));
    for (std::size_t i = 0; i < teams; ++i) {
      CHECK(after.standings[i].team == before.standings[i].team);
      CHECK(after.standings[i].ranks == before.standings[i].ranks);
    }
  }
}

TEST_CASE("column names") {
  CHECK(column_name(kColumns[0]) == "ET_DSC");
  CHECK(column_name(kColumns[5]) == "WT_HD95");
}
