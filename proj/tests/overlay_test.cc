#include <gtest/gtest.h>

#include "mits/overlay.hpp"
#include "support/generators.hpp"

using namespace mits;

TEST(Overlay, EmptyIsFreeFlow) {
  auto const o = network_overlay{};
  EXPECT_DOUBLE_EQ(o.residual(3, 1), 1.0);
  EXPECT_TRUE(o.in_service(3, 1));
  EXPECT_EQ(o.board_wait(1), 0);
  EXPECT_TRUE(o.pristine());
}

TEST(Overlay, ContributionsCombine) {
  auto o = network_overlay{};
  o.set_event_factor({0, 0}, "E:a", 0.5);
  o.set_event_factor({0, 0}, "E:b", 0.5);
  EXPECT_DOUBLE_EQ(o.residual(0, 0), 0.25);
  o.set_floor({0, 0}, "P", 0.7);
  EXPECT_DOUBLE_EQ(o.residual(0, 0), 0.7);
  o.set_action_factor({0, 0}, "R", 0.5);
  EXPECT_DOUBLE_EQ(o.residual(0, 0), 0.35);
  o.remove_source("P");
  EXPECT_DOUBLE_EQ(o.residual(0, 0), 0.125);
}

TEST(Overlay, LatestSignalPlanWinsAndIsClamped) {
  auto o = network_overlay{};
  EXPECT_FALSE(o.push_signal({1, 0}, "S1", 1.5));
  EXPECT_DOUBLE_EQ(o.residual(1, 0), 1.0);
  o.set_event_factor({1, 0}, "E", 0.4);
  EXPECT_DOUBLE_EQ(o.residual(1, 0), 0.6);
  EXPECT_TRUE(o.push_signal({1, 0}, "S2", 2.0));
  EXPECT_DOUBLE_EQ(o.residual(1, 0), 0.8);
  o.remove_source("S2");
  EXPECT_DOUBLE_EQ(o.residual(1, 0), 0.6);
}

TEST(Overlay, ScheduledServiceAndHeadway) {
  auto layout = service_layout{};
  layout.scheduled_modes = {2};
  layout.covered = {{5, 2}};
  auto o = network_overlay{layout, {0, 0, 600000}};
  EXPECT_TRUE(o.in_service(5, 2));
  EXPECT_FALSE(o.in_service(6, 2));
  EXPECT_TRUE(o.in_service(6, 1));
  EXPECT_EQ(o.board_wait(2), 300000);
  o.add_service({6, 2}, "X/1");
  EXPECT_TRUE(o.in_service(6, 2));
  o.remove_source("X/1");
  EXPECT_FALSE(o.in_service(6, 2));
  EXPECT_EQ(o, (network_overlay{layout, {0, 0, 600000}}));
}

TEST(Overlay, RemovingEverySourceRestoresExactly) {
  auto g = mits::test::gen{7};
  for (auto round = 0; round != 200; ++round) {
    auto const before = network_overlay{};
    auto o = before;
    auto sources = std::vector<std::string>{};
    auto const n = g.between(1, 20);
    for (auto i = 0; i != n; ++i) {
      auto const src = "S" + std::to_string(g.between(0, 5));
      sources.push_back(src);
      auto const key = cell_key{static_cast<std::size_t>(g.between(0, 4)),
                                static_cast<std::size_t>(g.between(0, 2))};
      switch (g.between(0, 4)) {
        case 0: o.set_event_factor(key, src, g.unit()); break;
        case 1: o.set_floor(key, src, g.unit()); break;
        case 2: o.set_action_factor(key, src, g.unit()); break;
        case 3: o.push_signal(key, src, 2.0 * g.unit()); break;
        default: o.add_service(key, src);
      }
      for (auto s = 0U; s != 5; ++s) {
        for (auto m = 0U; m != 3; ++m) {
          auto const r = o.residual(s, m);
          ASSERT_GE(r, 0.0);
          ASSERT_LE(r, 1.0);
        }
      }
    }
    g.shuffle(sources);
    for (auto const& s : sources) {
      o.remove_source(s);
    }
    EXPECT_TRUE(o.pristine());
    EXPECT_EQ(o, before);
  }
}

TEST(Overlay, VersionAdvancesOnMutation) {
  auto o = network_overlay{};
  auto const v0 = o.version();
  o.set_event_factor({0, 0}, "E", 0.5);
  EXPECT_GT(o.version(), v0);
}

TEST(Traversal, ScalesWithResidual) {
  EXPECT_EQ(traversal_ms(60.0, 1.0), 60000);
  EXPECT_EQ(traversal_ms(60.0, 0.5), 120000);
  EXPECT_EQ(traversal_ms(10.0, 0.3), 33333);
  EXPECT_EQ(traversal_ms(60.0, 0.0), kNever);
  EXPECT_EQ(traversal_ms(0.0001, 1.0), 1);
}
