// Properties of the combined reduction on the 64-node benchmark network
// (default benchmark configuration, computed once).
#include <doctest.h>

#include <cmath>
#include <iostream>

#include "gramion/benchmark.hpp"

namespace bn = gramion::bench;
namespace rd = gramion::reduce;

namespace {

const bn::OfflineArtifacts& artifacts() {
    static const bn::OfflineArtifacts art = bn::run_offline(bn::BenchmarkConfig{});
    return art;
}

std::size_t knee() { return rd::choose_order(artifacts().parameter_svd.s, rd::OrderRule{}); }

}  // namespace

TEST_CASE("parameter knee lies between 50 and 80") {
    const std::size_t q = knee();
    MESSAGE("knee order " << q);
    CHECK(q >= 50);
    CHECK(q <= 80);
}

TEST_CASE("theta l1 norm barely changes at the knee and changes more at half the knee") {
    const auto& art = artifacts();
    const std::size_t q = knee();
    const double at_knee = bn::theta_l1_change(art.system.theta, bn::reduce_at(art, art.system.n, q));
    const double at_half = bn::theta_l1_change(art.system.theta, bn::reduce_at(art, art.system.n, q / 2));
    MESSAGE("l1 change at q = " << at_knee << ", at q/2 = " << at_half);
    CHECK(at_knee < 0.05);
    CHECK(at_half > at_knee);
}

TEST_CASE("state truncation error decreases with order up to a factor of two") {
    const auto& art = artifacts();
    double previous = -1.0;
    for (std::size_t r = 19; r <= 64; r += 5) {
        const double e = bn::impulse_error(art.system, bn::reduce_at(art, r, 65));
        MESSAGE("r = " << r << ": " << e);
        if (previous >= 0.0) CHECK(e <= 2.0 * previous);
        previous = e;
    }
}

TEST_CASE("truncating to half the knee costs at least five times the knee error") {
    // Parameter truncation only (all states kept) so the state error does not mask it.
    const auto& art = artifacts();
    const std::size_t q = knee();
    const double at_knee = bn::impulse_error(art.system, bn::reduce_at(art, art.system.n, q));
    const double at_half = bn::impulse_error(art.system, bn::reduce_at(art, art.system.n, q / 2));
    MESSAGE("impulse error at q = " << at_knee << ", at q/2 = " << at_half << ", ratio " << at_half / at_knee);
    CHECK(at_half >= 5.0 * at_knee);
}
