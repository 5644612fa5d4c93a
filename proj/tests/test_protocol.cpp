#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "wot/protocol.hpp"
#include "wot/serialize.hpp"

using namespace wot;

namespace {

ProtocolConfig base_config() {
  ProtocolConfig cfg;
  cfg.n = 20'000;
  cfg.r = 0.16;
  cfg.eps = {0.5, 0.9, 0.4};
  return cfg;  // beta = 0.4 -> case 1
}

}  // namespace

TEST_CASE("dimension derivation per case") {
  SECTION("case 1") {
    ProtocolConfig cfg;
    cfg.n = 10'000;
    cfg.r = 0.2;
    cfg.eps = {0.5, 1.0, 0.5};
    auto d = derive_dimensions(cfg);
    CHECK(cfg.beta() == Catch::Approx(0.4));
    CHECK(d.case_id == 1);
    CHECK(d.n_beta == 4000);
    CHECK(d.n_alpha == 200);
    CHECK(d.k == 1900);
    CHECK(d.overlap == 0);
  }
  SECTION("case 2") {
    ProtocolConfig cfg;
    cfg.n = 10'000;
    cfg.r = 0.2;
    cfg.eps = {0.3, 0.9, 0.5};
    cfg.delta = 0.04;  // needs r < eps1 - 2*delta
    auto d = derive_dimensions(cfg);
    CHECK(cfg.beta() == Catch::Approx(0.4));
    CHECK(d.case_id == 2);
    CHECK(d.overlap == 0);
  }
  SECTION("case 3 with exact overlap") {
    ProtocolConfig cfg;
    cfg.n = 20'000;
    cfg.r = 0.104;
    cfg.eps = {0.45, 1.0, 0.2};
    cfg.alpha = 0.005;
    cfg.delta = 0.02;
    auto d = derive_dimensions(cfg);
    CHECK(cfg.beta() == Catch::Approx(0.52));
    CHECK(d.case_id == 3);
    CHECK(d.n_alpha == 100);
    CHECK(d.n_beta == 10'400);
    // overlap keeps |B| == |G| exactly: n_beta - (n - n_beta - n_alpha);
    // the alpha-free asymptotic value would be n(2 beta - 1) = 800
    CHECK(d.overlap == 900);
    CHECK(d.overlap == 2 * d.n_beta + d.n_alpha - cfg.n);
  }
}

TEST_CASE("case tie-breaks") {
  ProtocolConfig cfg;
  cfg.n = 10'000;
  cfg.r = 0.2;
  cfg.eps = {0.4, 0.9, 0.5};  // beta == eps1 == 0.4 -> case 1
  CHECK(derive_dimensions(cfg).case_id == 1);

  ProtocolConfig half;
  half.n = 20'000;
  half.r = 0.15;
  half.eps = {0.35, 1.0, 0.3};  // beta == 0.5 exactly, eps1 < beta -> case 2
  half.delta = 0.02;
  CHECK(half.beta() == Catch::Approx(0.5));
  CHECK(derive_dimensions(half).case_id == 2);

  ProtocolConfig big;
  big.n = 20'000;
  big.r = 0.16;
  big.eps = {0.4, 1.0, 0.3};  // beta = 0.5333 > 1/2 -> case 3
  big.delta = 0.02;
  CHECK(derive_dimensions(big).case_id == 3);
}

TEST_CASE("dimension derivation rejects infeasible configs") {
  ProtocolConfig cfg = base_config();

  SECTION("eps1 = 0 leaves no room for any rate") {
    cfg.eps.eps1 = 0.0;
    CHECK_THROWS_AS(derive_dimensions(cfg), std::invalid_argument);
  }
  SECTION("rate above the feasible cap") {
    cfg.r = 0.21;  // cap here is eps3(1-eps1) = 0.2
    CHECK_THROWS_AS(derive_dimensions(cfg), std::invalid_argument);
  }
  SECTION("typicality margin eats the rate") {
    cfg.r = 0.41;
    cfg.eps = {0.5, 1.0, 0.9};  // r < eps1 - 2 delta = 0.4 fails
    CHECK_THROWS_AS(derive_dimensions(cfg), std::invalid_argument);
  }
  SECTION("wrong erasure regime") {
    cfg.eps = {0.5, 0.3, 0.4};
    CHECK_THROWS_AS(derive_dimensions(cfg), std::invalid_argument);
  }
  SECTION("beta + alpha above 1") {
    cfg.eps = {0.4, 1.0, 0.6};
    cfg.r = 0.33;  // beta = 0.55, fine alone...
    cfg.alpha = 0.5;  // ...but beta + alpha = 1.05
    cfg.delta = 0.001;
    CHECK_THROWS_AS(derive_dimensions(cfg), std::invalid_argument);
  }
  SECTION("string length collapses to zero") {
    cfg.n = 10;
    cfg.r = 0.16;  // k = floor(10 * 0.15) = 1, fine; push tilde up
    cfg.delta_tilde = 0.155;
    CHECK_THROWS_AS(derive_dimensions(cfg), std::invalid_argument);
  }
  SECTION("delta_bar outside its window") {
    cfg.delta_bar = 0.01;  // >= alpha*(eps3-delta) = 0.007
    CHECK_THROWS_AS(derive_dimensions(cfg), std::invalid_argument);
  }
}

TEST_CASE("typicality check") {
  ProtocolConfig cfg;
  cfg.n = 1000;
  cfg.r = 0.1;
  cfg.eps = {0.5, 0.9, 0.4};

  TritVector all_erased(cfg.n, Trit::Erasure);
  CHECK(check_typicality(all_erased, cfg) == TypicalityResult::Abort);

  // exactly ceil(n(eps1-delta)) erasures, rest non-erased: boundary passes
  size_t need = static_cast<size_t>(
      std::ceil(static_cast<double>(cfg.n) * (cfg.eps.eps1 - cfg.delta)));
  TritVector boundary(cfg.n, Trit::Zero);
  for (size_t i = 0; i < need; ++i) boundary[i] = Trit::Erasure;
  CHECK(check_typicality(boundary, cfg) == TypicalityResult::Proceed);
  // one fewer erasure aborts
  boundary[0] = Trit::One;
  CHECK(check_typicality(boundary, cfg) == TypicalityResult::Abort);

  // thresholds go non-binding once delta >= max(eps1, 1-eps1)
  ProtocolConfig loose = cfg;
  loose.delta = 0.6;
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    BitVec x = random_bits(cfg.n, rng);
    auto [y, z] = transmit(x, cfg.eps, rng);
    CHECK(check_typicality(y, loose) == TypicalityResult::Proceed);
  }
}

TEST_CASE("empirical abort rate stays under the analytic bound") {
  ProtocolConfig cfg;
  cfg.n = 20'000;
  cfg.r = 0.16;
  cfg.eps = {0.5, 0.9, 0.4};
  Rng rng(17);
  int aborts = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    BitVec x = random_bits(cfg.n, rng);
    auto [y, z] = transmit(x, cfg.eps, rng);
    aborts += (check_typicality(y, cfg) == TypicalityResult::Abort);
  }
  CHECK(static_cast<double>(aborts) / trials <= abort_probability_bound(cfg));
}

TEST_CASE("shared-bit phase") {
  ProtocolConfig cfg;
  cfg.n = 2000;
  cfg.r = 0.12;
  cfg.eps = {0.5, 0.9, 0.4};
  cfg.alpha = 0.05;
  auto dims = derive_dimensions(cfg);

  Rng rng(555);
  int ones = 0;
  const int trials = 10'000;
  for (int t = 0; t < trials; ++t) {
    BitVec x = random_bits(cfg.n, rng);
    auto [y, z] = transmit(x, cfg.eps, rng);
    if (check_typicality(y, cfg) == TypicalityResult::Abort) continue;
    auto sb = phase1_shared_bit(x, y, dims, rng);

    REQUIRE(sb.s_alice == sb.s_bob);  // exact recovery, every run
    ones += sb.s_bob;

    if (t == 0) {
      CHECK(sb.msg.l_alpha.size() == dims.n_alpha);
      CHECK(std::is_sorted(sb.msg.l_alpha.begin(), sb.msg.l_alpha.end()));
      for (uint32_t i : sb.msg.l_alpha) CHECK_FALSE(erased(y[i]));
      // masked bit is exactly K_alpha xor S
      int k_alpha = sb.msg.f_alpha.apply(gather_bits(x, sb.msg.l_alpha)).get(0);
      CHECK(sb.msg.masked_s == (k_alpha ^ sb.s_bob));
    }
  }
  // S is a fresh uniform bit
  double freq = static_cast<double>(ones) / trials;
  CHECK(std::abs(freq - 0.5) <= 4 * std::sqrt(0.25 / trials));

  TritVector all_erased(cfg.n, Trit::Erasure);
  BitVec x(cfg.n);
  CHECK_THROWS_AS(phase1_shared_bit(x, all_erased, dims, rng), std::runtime_error);
}

TEST_CASE("set formation per case") {
  Rng rng(808);

  auto prepare = [&](const ProtocolConfig& cfg) {
    auto dims = derive_dimensions(cfg);
    while (true) {
      BitVec x = random_bits(cfg.n, rng);
      auto [y, z] = transmit(x, cfg.eps, rng);
      if (check_typicality(y, cfg) == TypicalityResult::Proceed) {
        auto sb = phase1_shared_bit(x, y, dims, rng);
        return std::tuple{dims, y, sb.msg.l_alpha};
      }
    }
  };

  SECTION("case 1: B is purely erased, disjoint from G") {
    ProtocolConfig cfg = base_config();
    auto [dims, y, l_alpha] = prepare(cfg);
    auto [g, b] = form_sets(y, l_alpha, dims, rng);
    REQUIRE(g.size() == dims.n_beta);
    REQUIRE(b.size() == dims.n_beta);
    for (uint32_t i : g) CHECK_FALSE(erased(y[i]));
    for (uint32_t i : b) CHECK(erased(y[i]));
    std::vector<uint32_t> inter;
    std::set_intersection(g.begin(), g.end(), b.begin(), b.end(), std::back_inserter(inter));
    CHECK(inter.empty());
    std::set<uint32_t> alpha_set(l_alpha.begin(), l_alpha.end());
    for (uint32_t i : g) CHECK_FALSE(alpha_set.count(i));
  }

  SECTION("case 2: every erased coordinate lands in B") {
    ProtocolConfig cfg;
    cfg.n = 20'000;
    cfg.r = 0.2;
    cfg.eps = {0.3, 0.9, 0.5};
    cfg.delta = 0.04;
    auto [dims, y, l_alpha] = prepare(cfg);
    auto [g, b] = form_sets(y, l_alpha, dims, rng);
    REQUIRE(b.size() == dims.n_beta);
    std::set<uint32_t> bset(b.begin(), b.end());
    for (uint32_t i : erased_indices(y)) CHECK(bset.count(i));
    std::vector<uint32_t> inter;
    std::set_intersection(g.begin(), g.end(), b.begin(), b.end(), std::back_inserter(inter));
    CHECK(inter.empty());
  }

  SECTION("case 3: controlled overlap and enough erasures") {
    ProtocolConfig cfg;
    cfg.n = 20'000;
    cfg.r = 0.104;
    cfg.eps = {0.45, 1.0, 0.2};
    cfg.alpha = 0.005;
    cfg.delta = 0.02;
    auto [dims, y, l_alpha] = prepare(cfg);
    auto [g, b] = form_sets(y, l_alpha, dims, rng);
    REQUIRE(g.size() == dims.n_beta);
    REQUIRE(b.size() == dims.n_beta);
    std::vector<uint32_t> inter;
    std::set_intersection(g.begin(), g.end(), b.begin(), b.end(), std::back_inserter(inter));
    CHECK(inter.size() == dims.overlap);
    // every coordinate outside G and L_alpha is in B
    std::set<uint32_t> bset(b.begin(), b.end());
    std::set<uint32_t> gset(g.begin(), g.end());
    std::set<uint32_t> aset(l_alpha.begin(), l_alpha.end());
    for (uint32_t i = 0; i < cfg.n; ++i)
      if (!gset.count(i) && !aset.count(i)) CHECK(bset.count(i));
    // B holds at least n*r Bob-erased coordinates
    size_t erased_in_b = 0;
    for (uint32_t i : b) erased_in_b += erased(y[i]);
    CHECK(static_cast<double>(erased_in_b) >=
          static_cast<double>(cfg.n) * cfg.r);
  }

  SECTION("pool exhaustion is loud") {
    ProtocolConfig cfg = base_config();
    auto dims = derive_dimensions(cfg);
    TritVector y(cfg.n, Trit::Zero);  // no erasures at all; case-1 B can't fill
    CHECK_THROWS_AS(form_sets(y, {}, dims, rng), std::runtime_error);
  }
}

TEST_CASE("label assignment truth table") {
  std::vector<uint32_t> g{1, 2}, b{3, 4};
  auto check = [&](int c, int s, bool swapped) {
    auto [l0, l1] = assign_labels(g, b, c, s);
    if (swapped) {
      CHECK(l0 == b);
      CHECK(l1 == g);
    } else {
      CHECK(l0 == g);
      CHECK(l1 == b);
    }
  };
  check(0, 0, false);
  check(1, 1, false);
  check(0, 1, true);
  check(1, 0, true);
  CHECK_THROWS_AS(assign_labels({1}, {2, 3}, 0, 0), std::invalid_argument);
}

TEST_CASE("encrypted delivery and decode algebra") {
  ProtocolConfig cfg;
  cfg.n = 4000;
  cfg.r = 0.16;
  cfg.eps = {0.5, 0.9, 0.4};
  auto dims = derive_dimensions(cfg);
  Rng rng(2718);

  BitVec x = random_bits(cfg.n, rng);
  TritVector y;
  {
    TritVector z;
    do {
      x = random_bits(cfg.n, rng);
      std::tie(y, z) = transmit(x, cfg.eps, rng);
    } while (check_typicality(y, cfg) == TypicalityResult::Abort);
  }
  auto sb = phase1_shared_bit(x, y, dims, rng);
  auto [g, b] = form_sets(y, sb.msg.l_alpha, dims, rng);

  BitVec k0 = random_bits(dims.k, rng), k1 = random_bits(dims.k, rng);

  for (int c : {0, 1}) {
    for (int s : {0, 1}) {
      auto [l0, l1] = assign_labels(g, b, c, s);
      auto msg = alice_respond(x, l0, l1, s, k0, k1, dims, rng);
      CHECK(msg.ct0.size() == dims.k);
      CHECK(msg.ct1.size() == dims.k);

      // position j carries K_{j xor s}
      BitVec pad0 = msg.f0.apply(gather_bits(x, l0));
      CHECK((msg.ct0 ^ pad0) == (s == 0 ? k0 : k1));

      BitVec k_hat = bob_decode(y, l0, l1, msg, c, s);
      CHECK(k_hat == (c == 0 ? k0 : k1));
    }
  }

  // wrong string length is rejected
  BitVec shorty = random_bits(dims.k - 1, rng);
  auto [l0, l1] = assign_labels(g, b, 0, 0);
  CHECK_THROWS_AS(alice_respond(x, l0, l1, 0, shorty, k1, dims, rng), std::invalid_argument);

  // an erased coordinate inside Bob's selected set is a protocol violation
  auto msg = alice_respond(x, l0, l1, 0, k0, k1, dims, rng);
  TritVector y_bad = y;
  y_bad[l0[0]] = Trit::Erasure;
  CHECK_THROWS_AS(bob_decode(y_bad, l0, l1, msg, 0, 0), std::logic_error);
}

TEST_CASE("ciphertext order carries no marker of s") {
  // first-bit frequency of ct0 must match across the two orders
  ProtocolConfig cfg;
  cfg.n = 1000;
  cfg.r = 0.12;
  cfg.eps = {0.5, 0.9, 0.4};
  cfg.alpha = 0.05;
  auto dims = derive_dimensions(cfg);
  Rng rng(31);
  int ones[2] = {0, 0}, counts[2] = {0, 0};
  for (int t = 0; t < 4000; ++t) {
    BitVec x;
    TritVector y, z;
    do {
      x = random_bits(cfg.n, rng);
      std::tie(y, z) = transmit(x, cfg.eps, rng);
    } while (check_typicality(y, cfg) == TypicalityResult::Abort);
    auto sb = phase1_shared_bit(x, y, dims, rng);
    auto [g, b] = form_sets(y, sb.msg.l_alpha, dims, rng);
    int c = rng.bit(), s = rng.bit();
    auto [l0, l1] = assign_labels(g, b, c, s);
    BitVec k0 = random_bits(dims.k, rng), k1 = random_bits(dims.k, rng);
    auto msg = alice_respond(x, l0, l1, s, k0, k1, dims, rng);
    ones[s] += msg.ct0.get(0);
    counts[s]++;
  }
  double p0 = static_cast<double>(ones[0]) / counts[0];
  double p1 = static_cast<double>(ones[1]) / counts[1];
  double sigma = std::sqrt(0.25 / counts[0] + 0.25 / counts[1]);
  CHECK(std::abs(p0 - p1) <= 4 * sigma);
}

TEST_CASE("full runs decode exactly") {
  // spot config chosen so beta lands in case 2 at scale
  ProtocolConfig cfg;
  cfg.n = 20'000;
  cfg.r = 0.24;
  cfg.eps = {0.4, 0.9, 0.5};
  auto dims = derive_dimensions(cfg);
  CHECK(dims.case_id == 2);
  CHECK(dims.k == 4600);

  Rng seeds(98765);
  for (int t = 0; t < 10; ++t) {
    Rng rng(seeds.next_u64());
    BitVec k0 = random_bits(dims.k, rng), k1 = random_bits(dims.k, rng);
    int c = rng.bit();
    ProtocolRun run = run_protocol(cfg, k0, k1, c, rng);
    REQUIRE(run.k_hat == (c == 0 ? k0 : k1));
    CHECK(run.v_a.f == run.v_b.f);  // one shared transcript object
    CHECK(run.v_b.f == run.v_e.f);
    CHECK(run.v_e.f->l0.size() == run.v_e.f->l1.size());
  }
}

TEST_CASE("identical seed reproduces the transcript byte for byte") {
  ProtocolConfig cfg;
  cfg.n = 2000;
  cfg.r = 0.12;
  cfg.eps = {0.5, 0.9, 0.4};
  cfg.alpha = 0.05;
  auto dims = derive_dimensions(cfg);

  auto run_with = [&](uint64_t seed) {
    Rng rng(seed);
    BitVec k0 = random_bits(dims.k, rng), k1 = random_bits(dims.k, rng);
    return serialize_transcript(*run_protocol(cfg, k0, k1, 1, rng).v_e.f);
  };
  CHECK(run_with(42) == run_with(42));
  CHECK(run_with(42) != run_with(43));
}

TEST_CASE("infeasible configs cannot run") {
  ProtocolConfig cfg = base_config();
  cfg.eps.eps1 = 0.0;
  Rng rng(1);
  BitVec k(10);
  CHECK_THROWS_AS(run_protocol(cfg, k, k, 0, rng), std::invalid_argument);
}

TEST_CASE("resend limit surfaces as its own error") {
  ProtocolConfig cfg;
  cfg.n = 200;
  cfg.r = 0.12;
  cfg.eps = {0.5, 0.9, 0.4};
  cfg.alpha = 0.1;
  cfg.delta = 0.01;   // very tight typicality at small n: aborts are frequent
  cfg.max_resends = 0;
  auto dims = derive_dimensions(cfg);
  Rng rng(7);
  BitVec k0 = random_bits(dims.k, rng), k1 = random_bits(dims.k, rng);
  bool threw = false;
  for (int t = 0; t < 50 && !threw; ++t) {
    try {
      run_protocol(cfg, k0, k1, 0, rng);
    } catch (const ResendLimitExceeded&) {
      threw = true;
    }
  }
  CHECK(threw);
}

TEST_CASE("transcript serialization is stable") {
  ProtocolConfig cfg;
  cfg.n = 64;
  cfg.r = 0.08;  // beta = 0.2; alpha + beta fits under the non-erased floor
  cfg.eps = {0.5, 0.9, 0.4};
  cfg.alpha = 0.1;
  cfg.max_resends = 1000;  // typicality at n=64 aborts often; retry freely
  auto dims = derive_dimensions(cfg);
  Rng rng(99);
  BitVec k0 = random_bits(dims.k, rng), k1 = random_bits(dims.k, rng);
  ProtocolRun run = run_protocol(cfg, k0, k1, 0, rng);
  std::string s = serialize_transcript(*run.v_e.f);
  CHECK(s.substr(0, 14) == "transcript.v1\n");
  CHECK(s.find("l_alpha 6 ") != std::string::npos);  // n_alpha = floor(6.4)
  CHECK(s.find("masked_s ") != std::string::npos);
  CHECK(s.find("ct0 4:") != std::string::npos);  // k = floor(64*0.07) = 4
}
