#include "squeezelab/detection.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace squeezelab;
using Catch::Approx;
using squeezelab::testing::Rng;

TEST_CASE("error propagation") {
  SECTION("unit-gain sine signal") {
    const auto out = error_propagation([](double p) { return std::sin(p); },
                                       [](double) { return 1.0; }, 0.0);
    REQUIRE(out.gain == Approx(1.0).margin(1e-10));
    REQUIRE(out.varPhase == Approx(1.0).margin(1e-9));
  }

  SECTION("homodyne mean signal gain") {
    const double alpha = 2.0, alphaR = 10.0;
    const auto out = error_propagation(
        [&](double p) { return -2.0 * alpha * alphaR * std::sin(p); },
        [](double) { return 1.0; }, 0.0);
    REQUIRE(out.gain == Approx(-40.0).margin(1e-8));
  }

  SECTION("an extremum of the mean has no first-order information") {
    REQUIRE_THROWS_AS(
        error_propagation([](double p) { return p * p; },
                          [](double) { return 1.0; }, 0.0),
        ZeroGainError);
  }
}

TEST_CASE("single-arm homodyne") {
  SECTION("finite reference amplitude") {
    const auto he = single_arm_homodyne_error(2.0, 1000.0, 0.5);
    REQUIRE(he.outcome.varPhase == Approx(0.02299273204).margin(1e-9));
    REQUIRE(he.asymptote == Approx(0.02299246507).margin(1e-9));
  }

  SECTION("no squeezing and a strong reference reproduce shot noise") {
    const auto he = single_arm_homodyne_error(2.0, 1e8, 0.0);
    REQUIRE(he.outcome.varPhase == Approx(1.0 / 16.0).margin(1e-12));
  }

  SECTION("invalid amplitudes") {
    REQUIRE_THROWS_AS(single_arm_homodyne_error(0.0, 10.0, 0.5),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(single_arm_homodyne_error(1.0, 0.0, 0.5),
                      std::invalid_argument);
  }

  SECTION("generic pipeline matches the closed form at theta = 0") {
    Rng rng(83);
    for (int trial = 0; trial < 5; ++trial) {
      const double alpha = rng.uniform(0.5, 3.0);
      const double alphaR = rng.uniform(5.0, 50.0);
      const double r = rng.uniform(0.0, 0.6);
      const auto closed = single_arm_homodyne_error(alpha, alphaR, r);
      const auto piped = homodyne_error_via_map(alpha, SqueezeParams(r, 0.0), alphaR);
      REQUIRE(piped.varPhase ==
              Approx(closed.outcome.varPhase).epsilon(1e-8));
      // Finite-difference gain against the analytic -2 alpha alphaR cos(phi).
      REQUIRE(piped.gain ==
              Approx(homodyne_analytic_gain(alpha, alphaR, 0.0)).epsilon(1e-6));
    }
  }
}

TEST_CASE("parametric readout statistics") {
  SECTION("pass-through coherent state") {
    const auto s = su11_single_arm_stats(2.0, 0.0, 0.0, 0.0, 0.0);
    REQUIRE(s.mean == Approx(4.0));
    REQUIRE(s.variance == Approx(4.0));
  }

  SECTION("amplified vacuum") {
    for (double theta : {0.0, 0.7}) {
      for (double phi : {0.0, 0.3}) {
        const auto s = su11_single_arm_stats(0.0, 0.0, theta, 0.5, phi);
        REQUIRE(s.mean == Approx(0.2715403174).margin(1e-9));
      }
    }
  }

  SECTION("coefficients stay normalized") {
    Rng rng(89);
    for (int trial = 0; trial < 50; ++trial) {
      const auto c = su11_coefficients(
          rng.uniform(0.0, 1.0), rng.uniform(0.0, std::numbers::pi),
          rng.uniform(0.0, 2.5), rng.uniform(-1.0, 1.0));
      REQUIRE(std::norm(c.C) - std::norm(c.S) == Approx(1.0).margin(1e-10));
    }
  }

  SECTION("strong-amplification forms approach the exact statistics") {
    // The residual scales as e^{-2R}; at R = 2 the mean still differs at the
    // few-percent level while the variance is already within 1e-3.
    const auto exact = su11_single_arm_stats(2.0, 0.5, 0.1, 2.0, 0.05);
    const auto approx = su11_single_arm_stats_large_r(2.0, 0.5, 0.1, 2.0, 0.05);
    REQUIRE(std::abs(exact.mean - approx.mean) / approx.mean < 5e-2);
    REQUIRE(std::abs(exact.variance - approx.variance) / approx.variance < 2e-2);
  }

  SECTION("approximation error decreases monotonically in R") {
    double prevMean = std::numeric_limits<double>::infinity();
    double prevVar = std::numeric_limits<double>::infinity();
    for (double bigR : {1.0, 2.0, 3.0}) {
      const auto exact = su11_single_arm_stats(2.0, 0.5, 0.1, bigR, 0.05);
      const auto approx =
          su11_single_arm_stats_large_r(2.0, 0.5, 0.1, bigR, 0.05);
      const double meanGap = std::abs(exact.mean - approx.mean) / approx.mean;
      const double varGap =
          std::abs(exact.variance - approx.variance) / approx.variance;
      REQUIRE(meanGap < prevMean);
      REQUIRE(varGap < prevVar);
      prevMean = meanGap;
      prevVar = varGap;
    }
  }
}

TEST_CASE("parametric readout error") {
  SECTION("default angle approaches the strong-reference homodyne error") {
    const double alpha = 10.0, r = 1.0;
    const auto out = su11_single_arm_error(alpha, r, su11_default_angle(alpha, r), 2.0);
    REQUIRE(out.outcome.varPhase ==
            Approx(3.383382081e-4).epsilon(0.05));
  }

  SECTION("small-angle closed form") {
    const auto out = su11_single_arm_error(10.0, 0.0, 0.3, 2.0);
    REQUIRE(out.closedForm == Approx(0.002778429226).margin(1e-9));
  }

  SECTION("the gain vanishes at theta = 0 and theta = pi/2") {
    REQUIRE_THROWS_AS(su11_single_arm_error(2.0, 0.5, 0.0, 2.0), ZeroGainError);
    REQUIRE_THROWS_AS(
        su11_single_arm_error(2.0, 0.5, std::numbers::pi / 2, 2.0),
        ZeroGainError);
  }

  SECTION("finite-difference gain matches the analytic derivative") {
    Rng rng(97);
    for (int trial = 0; trial < 5; ++trial) {
      const double alpha = rng.uniform(1.0, 5.0);
      const double r = rng.uniform(0.0, 0.8);
      const double theta = rng.uniform(0.1, 1.2);
      const double bigR = rng.uniform(0.5, 2.0);
      const auto out = su11_single_arm_error(alpha, r, theta, bigR);
      REQUIRE(out.outcome.gain ==
              Approx(su11_analytic_gain(alpha, r, theta, bigR, 0.0))
                  .epsilon(1e-6));
    }
  }
}

TEST_CASE("double homodyne") {
  SECTION("closed forms") {
    const auto e = double_homodyne_error(2.0, 0.0, 0.5);
    REQUIRE(e.varPhiPlus == Approx(0.0625));
    REQUIRE(e.varPhiMinus == Approx(0.02299246507).margin(1e-9));

    const auto coh = double_homodyne_error(2.0, 0.0, 0.0);
    REQUIRE(coh.varPhiPlus == Approx(0.0625));
    REQUIRE(coh.varPhiMinus == Approx(0.0625));

    REQUIRE_THROWS_AS(double_homodyne_error(0.0, 0.1, 0.1),
                      std::invalid_argument);
  }

  SECTION("saturates the two-mode-squeezer bound at large amplitude") {
    const double alpha = 100.0, r = 0.5;
    const auto realized = double_homodyne_error(alpha, -r, r);
    const TwoArmBound qcrb =
        closed_form_two_arm(TwoArmPrep::su11(alpha, 0.0, SqueezeParams(r, 0.0)));
    const double ratio = realized.varPhiMinus / qcrb.bound.varPhi(1, 1);
    REQUIRE(ratio >= 1.0 - 1e-12);
    REQUIRE(ratio <= 1.0 + 1e-3);
  }

  SECTION("generic pipeline matches the closed forms") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
      TwoArmPrep prep;
      prep.alpha = rng.uniform(1.0, 3.0);
      prep.sq1 = SqueezeParams(rng.uniform(0.0, 0.6), 0.0);
      prep.sq2 = SqueezeParams(rng.uniform(0.0, 0.6), 0.0);
      const auto closed = double_homodyne_error(prep.alpha, prep.sq1.r, prep.sq2.r);
      const auto piped = double_homodyne_error_via_map(prep);
      REQUIRE(piped.plus.varPhase == Approx(closed.varPhiPlus).epsilon(1e-8));
      REQUIRE(piped.minus.varPhase == Approx(closed.varPhiMinus).epsilon(1e-8));
    }
  }
}

TEST_CASE("double direct detection moments") {
  SECTION("coherent bright port with a dark vacuum") {
    const auto m = double_direct_moments(2.0, 0.0, 0.0);
    REQUIRE(m.varY == Approx(4.0));
    REQUIRE(m.varN1 == Approx(4.0));
    REQUIRE(m.varN2 == 0.0);
  }

  SECTION("dark-port squeezing reduces the exchange noise") {
    const auto m = double_direct_moments(2.0, 0.0, 0.5);
    REQUIRE(m.varY == Approx(1.743058082).margin(1e-9));
  }

  SECTION("mean differential photon number") {
    const auto m = double_direct_moments(2.0, 0.3, 0.5);
    REQUIRE(m.meanNminus == Approx(3.821192292).margin(1e-9));
  }
}

TEST_CASE("double direct detection error") {
  SECTION("single dark-port squeezer at the pi/4 offset") {
    const auto out = double_direct_error(2.0, 0.0, 0.5, std::numbers::pi / 4);
    REQUIRE(out.varPhase == Approx(0.0313467821).margin(1e-9));
    REQUIRE(out.varPhase ==
            Approx(double_direct_error_single_squeezer(2.0, 0.5,
                                                       std::numbers::pi / 4))
                .epsilon(1e-13));
  }

  SECTION("two-mode-squeezer preparation at the pi/4 offset") {
    const auto out = double_direct_error(2.0, -0.5, 0.5, std::numbers::pi / 4);
    REQUIRE(out.varPhase == Approx(0.04457211891).margin(1e-9));
    REQUIRE(out.varPhase ==
            Approx(double_direct_error_su11_prep(2.0, 0.5, std::numbers::pi / 4))
                .epsilon(1e-13));
  }

  SECTION("the large-amplitude form lies above the exact one and converges") {
    REQUIRE(double_direct_error_su11_prep_asymptotic(2.0, 0.5,
                                                     std::numbers::pi / 4) ==
            Approx(0.1355518025).margin(1e-9));
    const double exact1k =
        double_direct_error_su11_prep(1000.0, 0.5, std::numbers::pi / 4);
    const double asym1k = double_direct_error_su11_prep_asymptotic(
        1000.0, 0.5, std::numbers::pi / 4);
    REQUIRE(asym1k == Approx(exact1k).epsilon(1e-5));
  }

  SECTION("the pi/4 offset cancels the correlation term for any inputs") {
    Rng rng(103);
    for (int trial = 0; trial < 10; ++trial) {
      const double alpha = rng.uniform(1.0, 3.0);
      const double r1 = rng.uniform(-0.6, 0.6);
      const double r2 = rng.uniform(0.0, 0.6);
      const auto m = double_direct_moments(alpha, r1, r2);
      const auto out = double_direct_error(alpha, r1, r2, std::numbers::pi / 4);
      REQUIRE(out.varPhase ==
              Approx(m.varY / (4.0 * m.meanNminus * m.meanNminus))
                  .epsilon(1e-12));
    }
  }

  SECTION("singular operating points are rejected") {
    REQUIRE_THROWS_AS(double_direct_error(2.0, 0.0, 0.5, 0.0),
                      SingularOperatingPointError);
    REQUIRE_THROWS_AS(double_direct_error(2.0, 0.0, 0.5, std::numbers::pi / 2),
                      SingularOperatingPointError);
    REQUIRE_THROWS_AS(double_direct_error(0.0, 0.3, 0.3, std::numbers::pi / 4),
                      ZeroGainError);
  }
}

TEST_CASE("double direct detection from composed maps") {
  SECTION("input-mode moments are reproduced by the map pipeline") {
    Rng rng(107);
    for (int trial = 0; trial < 8; ++trial) {
      const double alpha = rng.uniform(0.5, 3.0);
      const double r1 = rng.uniform(-0.6, 0.6);
      const double r2 = rng.uniform(0.0, 0.6);
      const auto m = double_direct_moments(alpha, r1, r2);

      // Input stage only: squeezers plus bright displacement, no mixer.
      BogoliubovMap in = BogoliubovMap::identity(2);
      in = apply_dopa(std::move(in), 0, SqueezeParams(r1, 0.0));
      in = apply_dopa(std::move(in), 1, SqueezeParams(r2, 0.0));
      in = displace(std::move(in), 0, alpha);
      const MomentSet inMs = photon_covariance(in);
      REQUIRE(inMs.meanN(0) == Approx(m.meanN1).margin(1e-10));
      REQUIRE(inMs.meanN(1) == Approx(m.meanN2).margin(1e-10));
      REQUIRE(inMs.covN(0, 0) == Approx(m.varN1).margin(1e-10));
      REQUIRE(inMs.covN(1, 1) == Approx(m.varN2).margin(1e-10));
      REQUIRE(inMs.covN(0, 1) == Approx(m.covN1N2).margin(1e-10));

      // Output stage at phi- = pi/4: the differential photocurrent measures
      // the exchange form Y, so its variance must equal varY.
      TwoArmPrep prep;
      prep.alpha = alpha;
      prep.sq1 = SqueezeParams(r1, 0.0);
      prep.sq2 = SqueezeParams(r2, 0.0);
      BogoliubovMap outMap = build_map(two_arm_prep_program(prep));
      outMap = apply_phase(std::move(outMap), 0, std::numbers::pi / 4);
      outMap = apply_phase(std::move(outMap), 1, -std::numbers::pi / 4);
      outMap = apply_beamsplitter(std::move(outMap), 0, 1, 0.5);
      const MomentSet outMs = photon_covariance(outMap);
      const double varMinusOut =
          outMs.covN(0, 0) + outMs.covN(1, 1) - 2.0 * outMs.covN(0, 1);
      const double varPlusOut =
          outMs.covN(0, 0) + outMs.covN(1, 1) + 2.0 * outMs.covN(0, 1);
      REQUIRE(varMinusOut == Approx(m.varY).margin(1e-10));
      REQUIRE(varPlusOut == Approx(m.varN1 + m.varN2).margin(1e-10));
      REQUIRE(outMs.meanN(0) - outMs.meanN(1) ==
              Approx(m.meanNminus * std::cos(std::numbers::pi / 2))
                  .margin(1e-10));

      // Generic operating point: n-out statistics follow the closed
      // projections of the input moments.
      const double phi = rng.uniform(0.15, 0.6);
      BogoliubovMap g = build_map(two_arm_prep_program(prep));
      g = apply_phase(std::move(g), 0, phi);
      g = apply_phase(std::move(g), 1, -phi);
      g = apply_beamsplitter(std::move(g), 0, 1, 0.5);
      const MomentSet gm = photon_covariance(g);
      const double c2 = std::cos(2.0 * phi), s2 = std::sin(2.0 * phi);
      REQUIRE(gm.meanN(0) - gm.meanN(1) ==
              Approx(m.meanNminus * c2).margin(1e-10));
      REQUIRE(gm.covN(0, 0) + gm.covN(1, 1) - 2.0 * gm.covN(0, 1) ==
              Approx((m.varN1 + m.varN2) * c2 * c2 + m.varY * s2 * s2)
                  .margin(1e-10));
      REQUIRE(gm.covN(0, 0) - gm.covN(1, 1) ==
              Approx((m.varN1 - m.varN2) * c2).margin(1e-10));
    }
  }

  SECTION("map evaluation agrees with the closed formula") {
    Rng rng(109);
    for (int trial = 0; trial < 5; ++trial) {
      TwoArmPrep prep;
      prep.alpha = rng.uniform(1.0, 3.0);
      prep.sq1 = SqueezeParams(rng.uniform(0.0, 0.5), 0.0);
      prep.sq2 = SqueezeParams(rng.uniform(0.0, 0.5), 0.0);
      const double phi = rng.uniform(0.2, 0.7);
      const auto closed =
          double_direct_error(prep.alpha, prep.sq1.r, prep.sq2.r, phi);
      const auto piped = double_direct_error_via_map(prep, phi);
      REQUIRE(piped.varPhase == Approx(closed.varPhase).epsilon(1e-8));
    }
  }

  SECTION("the optimal combination beats the bare differential readout") {
    for (double alpha : {1.5, 2.5}) {
      for (double r1 : {0.1, 0.4}) {
        for (double r2 : {0.2, 0.6}) {
          for (double phi : {0.3, 0.6, 1.0}) {
            if (r1 == r2) continue;
            const auto m = double_direct_moments(alpha, r1, r2);
            const auto opt = double_direct_error(alpha, r1, r2, phi);
            const double c2 = std::cos(2.0 * phi), s2 = std::sin(2.0 * phi);
            const double naive =
                ((m.varN1 + m.varN2) * c2 * c2 + m.varY * s2 * s2) /
                (opt.gain * opt.gain);
            REQUIRE(opt.varPhase < naive);
          }
        }
      }
    }
  }
}

TEST_CASE("two-arm parametric readout sees only the common phase") {
  TwoArmPrep prep;
  prep.alpha = 1.5;
  prep.sq2 = SqueezeParams(0.4, 0.0);
  const BogoliubovMap map = build_map(two_arm_prep_program(prep));

  SECTION("differential sweeps leave the output means unchanged") {
    const double phiPlus = 0.35;
    const auto ref =
        two_arm_su11_readout_stats(map, 0.8, 0.2, phiPlus, phiPlus);
    for (int i = 0; i < 5; ++i) {
      const double phiMinus = -0.4 + 0.2 * i;
      const auto s = two_arm_su11_readout_stats(map, 0.8, 0.2,
                                                phiPlus + phiMinus,
                                                phiPlus - phiMinus);
      REQUIRE(s.mean1 == Approx(ref.mean1).margin(1e-12));
      REQUIRE(s.mean2 == Approx(ref.mean2).margin(1e-12));
    }
  }

  SECTION("common sweeps do change the output means") {
    const auto a = two_arm_su11_readout_stats(map, 0.8, 0.2, 0.0, 0.0);
    const auto b = two_arm_su11_readout_stats(map, 0.8, 0.2, 0.3, 0.3);
    REQUIRE(std::abs(a.mean1 - b.mean1) > 1e-3);
  }

  SECTION("R = 0 passes the preparation through") {
    const auto s = two_arm_su11_readout_stats(map, 0.0, 0.0, 0.1, -0.2);
    REQUIRE(s.mean1 == Approx(mean_photon(map, 0)).margin(1e-12));
    REQUIRE(s.mean2 == Approx(mean_photon(map, 1)).margin(1e-12));
  }

  SECTION("vacuum preparation yields amplifier photons only") {
    const auto vac = BogoliubovMap::identity(2);
    const auto s = two_arm_su11_readout_stats(vac, 0.5, 0.0, 0.7, -0.1);
    REQUIRE(s.mean1 == Approx(0.2715403174).margin(1e-9));
    REQUIRE(s.mean2 == Approx(0.2715403174).margin(1e-9));
  }
}

TEST_CASE("realized errors saturate the bounds at large amplitude") {
  // In the strong-carrier regime alpha^2 >= 1e4 e^{2r} every readout sits
  // within 1e-3 of its bound.
  const double r = 0.5;
  const double alpha = 1.2 * std::sqrt(1e4 * std::exp(2.0 * r));

  SECTION("single-arm homodyne") {
    const double bound =
        closed_form_single_arm(alpha, SqueezeParams(r, 0.0)).varPhi(0, 0);
    const auto realized =
        single_arm_homodyne_error(alpha, 100.0 * alpha, r);
    REQUIRE(realized.outcome.varPhase / bound >= 1.0 - 1e-12);
    REQUIRE(realized.outcome.varPhase / bound <= 1.0 + 1e-3);
  }

  SECTION("double homodyne") {
    TwoArmPrep prep;
    prep.alpha = alpha;
    prep.sq1 = SqueezeParams(r, 0.0);
    prep.sq2 = SqueezeParams(r, 0.0);
    const TwoArmBound qcrb = closed_form_two_arm(prep);
    const auto realized = double_homodyne_error(alpha, r, r);
    REQUIRE(realized.varPhiMinus / qcrb.bound.varPhi(1, 1) <= 1.0 + 1e-3);
    REQUIRE(realized.varPhiMinus / qcrb.bound.varPhi(1, 1) >= 1.0 - 1e-12);
    REQUIRE(realized.varPhiPlus / qcrb.bound.varPhi(0, 0) <= 1.0 + 1e-3);
  }

  SECTION("double direct detection at the pi/4 offset") {
    TwoArmPrep prep;
    prep.alpha = alpha;
    prep.sq2 = SqueezeParams(r, 0.0);
    const TwoArmBound qcrb = closed_form_two_arm(prep);
    const auto realized =
        double_direct_error(alpha, 0.0, r, std::numbers::pi / 4);
    REQUIRE(realized.varPhase / qcrb.bound.varPhi(1, 1) <= 1.0 + 1e-3);
    REQUIRE(realized.varPhase / qcrb.bound.varPhi(1, 1) >= 1.0 - 1e-12);
  }
}
