// Magnitude scoring, importance partitions, and the two pruned convolution
// operators, pinned to hand-worked micro-cases and their limit identities.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "spsconv/conv.hpp"
#include "spsconv/pruning.hpp"
#include "support.hpp"

using namespace spsconv;
using namespace testsupport;

TEST_CASE("magnitude map: zero row scores g=0, m=0.5") {
    SparseTensor t = make_tensor({{0, 0, 0, 0}}, {0.0f, 0.0f, 0.0f}, 3, {2, 2, 2});
    MagnitudeScores s = magnitude_map(t);
    CHECK(s.g[0] == 0.0f);
    CHECK(s.m[0] == 0.5f);
}

TEST_CASE("magnitude map: mean of absolute values, sigmoid squashed") {
    SparseTensor t = make_tensor({{0, 0, 0, 0}}, {1.0f, -3.0f, 2.0f}, 3, {2, 2, 2});
    MagnitudeScores s = magnitude_map(t);
    CHECK(s.g[0] == doctest::Approx(2.0f));
    CHECK(double(s.m[0]) == doctest::Approx(sigmoid_oracle(2.0)).epsilon(1e-6));
}

TEST_CASE("magnitude map: g is homogeneous and permutation-invariant") {
    SparseTensor t = make_tensor({{0, 0, 0, 0}}, {0.5f, -1.5f, 1.0f}, 3, {2, 2, 2});
    SparseTensor doubled = t;
    for (float& v : doubled.features) v *= 2.0f;
    SparseTensor permuted = t;
    permuted.features = {1.0f, 0.5f, -1.5f};
    CHECK(magnitude_map(doubled).g[0] == doctest::Approx(2.0f * magnitude_map(t).g[0]));
    CHECK(magnitude_map(permuted).g[0] == magnitude_map(t).g[0]);
}

TEST_CASE("magnitude map stays inside [0.5, 1) even for huge features") {
    SparseTensor t = random_tensor(13, {6, 6, 6}, 0.5, 2);
    MagnitudeScores s = magnitude_map(t);
    for (float m : s.m) {
        CHECK(m >= 0.5f);
        CHECK(m < 1.0f);
    }
    const float huge[1] = {1e30f};
    MagnitudeScores hs = magnitude_map(huge, 1, 1);
    CHECK(hs.m[0] < 1.0f);  // clamped below one, never a pure pass-through
}

TEST_CASE("magnitude map rejects zero channels") {
    CHECK_THROWS_AS(magnitude_map(nullptr, 0, 0), shape_error);
}

TEST_CASE("unimportant_count honours decimal intent") {
    CHECK(unimportant_count(0.3, 10) == 3);
    CHECK(unimportant_count(0.7, 10) == 7);
    CHECK(unimportant_count(0.1, 10) == 1);
    CHECK(unimportant_count(0.5, 5) == 2);
    CHECK(unimportant_count(0.0, 1000) == 0);
    CHECK(unimportant_count(1.0, 1000) == 1000);
    CHECK(unimportant_count(0.5, 0) == 0);
}

TEST_CASE("partition: magnitude keeps the top-g rows") {
    MagnitudeScores s;
    s.g = {0.9f, 0.5f, 0.7f, 0.1f};
    s.m = {0.5f, 0.5f, 0.5f, 0.5f};
    Partition p = partition(s, 0.5, SelectionStrategy::magnitude());
    CHECK(p.im == std::vector<int32_t>{0, 2});
    CHECK(p.nim == std::vector<int32_t>{1, 3});
}

TEST_CASE("partition: ratio 0 keeps everything, ratio 1 keeps nothing") {
    MagnitudeScores s;
    s.g = {0.9f, 0.5f, 0.7f};
    s.m = {0.5f, 0.5f, 0.5f};
    Partition keep = partition(s, 0.0, SelectionStrategy::magnitude());
    CHECK(keep.im == std::vector<int32_t>{0, 1, 2});
    CHECK(keep.nim.empty());
    Partition drop = partition(s, 1.0, SelectionStrategy::magnitude());
    CHECK(drop.im.empty());
    CHECK(drop.nim == std::vector<int32_t>{0, 1, 2});
}

TEST_CASE("partition rejects ratios outside [0, 1]") {
    MagnitudeScores s;
    s.g = {1.0f};
    s.m = {0.5f};
    CHECK_THROWS_AS(partition(s, -0.1, SelectionStrategy::magnitude()), config_error);
    CHECK_THROWS_AS(partition(s, 1.1, SelectionStrategy::magnitude()), config_error);
}

TEST_CASE("partition: inverse excludes exactly what magnitude admits") {
    MagnitudeScores s;
    s.g = {0.9f, 0.5f, 0.7f, 0.1f};
    s.m = {0.5f, 0.5f, 0.5f, 0.5f};
    Partition inv = partition(s, 0.5, SelectionStrategy::inverse());
    CHECK(inv.im == std::vector<int32_t>{1, 3});  // the two smallest g
    CHECK(inv.nim == std::vector<int32_t>{0, 2});

    // With ties the complement contract still holds: the prefix magnitude
    // keeps (ties to the lower row) is precisely the prefix inverse drops.
    MagnitudeScores ties;
    ties.g = {1.0f, 1.0f, 1.0f, 1.0f};
    ties.m = {0.5f, 0.5f, 0.5f, 0.5f};
    Partition mag = partition(ties, 0.5, SelectionStrategy::magnitude());
    Partition vin = partition(ties, 0.5, SelectionStrategy::inverse());
    CHECK(mag.im == std::vector<int32_t>{0, 1});
    CHECK(vin.nim == mag.im);
    CHECK(vin.im == mag.nim);
}

TEST_CASE("partition: random is seed-deterministic with exact sizes") {
    MagnitudeScores s;
    s.g.assign(100, 0.0f);
    s.m.assign(100, 0.5f);
    Partition a = partition(s, 0.3, SelectionStrategy::random(7));
    Partition b = partition(s, 0.3, SelectionStrategy::random(7));
    Partition c = partition(s, 0.3, SelectionStrategy::random(8));
    CHECK(a.im == b.im);
    CHECK(a.nim == b.nim);
    CHECK(a.im != c.im);
    CHECK(a.im.size() == 70);
    CHECK(a.nim.size() == 30);
}

TEST_CASE("partition is disjoint and exhaustive for every strategy and ratio") {
    MagnitudeScores s;
    std::mt19937_64 rng(19);
    for (int i = 0; i < 37; ++i) {
        s.g.push_back(float(unit_double(rng)));
        s.m.push_back(0.5f);
    }
    for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        for (auto strat : {SelectionStrategy::magnitude(), SelectionStrategy::random(3),
                           SelectionStrategy::inverse()}) {
            Partition p = partition(s, r, strat);
            CHECK(int64_t(p.nim.size()) == unimportant_count(r, 37));
            CHECK(p.im.size() + p.nim.size() == 37);
            std::vector<int32_t> all = p.im;
            all.insert(all.end(), p.nim.begin(), p.nim.end());
            std::sort(all.begin(), all.end());
            for (size_t i = 0; i < all.size(); ++i) CHECK(all[i] == int32_t(i));
            CHECK(std::is_sorted(p.im.begin(), p.im.end()));
            CHECK(std::is_sorted(p.nim.begin(), p.nim.end()));
        }
    }
}

TEST_CASE("mask_reweight scales each row by its own mask value") {
    SparseTensor t = make_tensor({{0, 0, 0, 0}, {0, 1, 0, 0}}, {2.0f, -4.0f}, 1, {2, 2, 2});
    MagnitudeScores s = magnitude_map(t);
    SparseTensor x = mask_reweight(t, s);
    CHECK(x.at(0, 0) == 2.0f * s.m[0]);
    CHECK(x.at(1, 0) == -4.0f * s.m[1]);
    CHECK(t.at(0, 0) == 2.0f);  // source untouched
}

TEST_CASE("stride mask keeps positions divisible on every axis") {
    std::vector<Coord> coords{{0, 0, 0, 0}, {0, 2, 4, 6}, {0, 1, 2, 2}};
    std::vector<bool> m = stride_mask(coords, {2, 2, 2});
    CHECK(m == std::vector<bool>{true, true, false});
    CHECK(stride_mask(coords, {1, 1, 1}) == std::vector<bool>(3, true));
    CHECK_THROWS_AS(stride_mask({{0, -1, 0, 0}}, {2, 2, 2}), std::domain_error);
}

TEST_CASE("dilation closes over the kernel window with clipping") {
    KernelSpec spec{3, {1, 1, 1}};
    std::vector<Coord> centre{{0, 1, 1, 1}};
    std::vector<Coord> d = dilate_positions(centre, spec, {4, 4, 4});
    REQUIRE(d.size() == 27);
    size_t i = 0;
    for (int32_t z = 0; z <= 2; ++z)
        for (int32_t y = 0; y <= 2; ++y)
            for (int32_t x = 0; x <= 2; ++x) CHECK(d[i++] == Coord{0, x, y, z});

    CHECK(dilate_positions({}, spec, {4, 4, 4}).empty());
    CHECK(dilate_positions({{0, 0, 0, 0}}, spec, {4, 4, 4}).size() == 8);

    // Overlapping windows union without duplicates.
    std::vector<Coord> two{{0, 1, 1, 1}, {0, 1, 1, 2}};
    CHECK(dilate_positions(two, spec, {4, 4, 4}).size() == 36);
}

TEST_CASE("pruned downsampling positions: the three one-voxel cases") {
    KernelSpec spec{3, {2, 2, 2}};

    // Important voxel at (1,1,1): dilates into (0..2)^3, evens halve to the
    // eight octants.
    Partition imp;
    imp.im = {0};
    std::vector<Coord> got = sprs_output_positions(imp, {{0, 1, 1, 1}}, spec, {4, 4, 4});
    REQUIRE(got.size() == 8);
    size_t i = 0;
    for (int32_t z = 0; z <= 1; ++z)
        for (int32_t y = 0; y <= 1; ++y)
            for (int32_t x = 0; x <= 1; ++x) CHECK(got[i++] == Coord{0, x, y, z});

    // Unimportant voxel at (1,1,1): no dilation, fails the stride mask.
    Partition unimp;
    unimp.nim = {0};
    CHECK(sprs_output_positions(unimp, {{0, 1, 1, 1}}, spec, {4, 4, 4}).empty());

    // Unimportant voxel at (2,2,2): survives the mask, lands at (1,1,1).
    std::vector<Coord> kept = sprs_output_positions(unimp, {{0, 2, 2, 2}}, spec, {4, 4, 4});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0] == Coord{0, 1, 1, 1});
}

TEST_CASE("SPSS hand case: important neighbor convolves, unimportant passes through") {
    SparseTensor t = make_tensor({{0, 0, 0, 0}, {0, 0, 0, 1}}, {2.0f, 0.0f}, 1, {4, 4, 4});
    ConvWeights w = ConvWeights::filled(3, 1, 1, 1.0f);
    SpssResult r = spss_conv_detail(t, {3, {1, 1, 1}}, w, 0.5, SelectionStrategy::magnitude());

    // Row 0 (g=2) is important: gathers both re-weighted rows. Row 1 (g=0)
    // is unimportant: passes its re-weighted feature (0 * 0.5) through.
    REQUIRE(r.out.size() == 2);
    CHECK(double(r.out.at(0, 0)) ==
          doctest::Approx(2.0 * sigmoid_oracle(2.0) + 0.0 * sigmoid_oracle(0.0)).epsilon(1e-6));
    CHECK(r.out.at(1, 0) == 0.0f);
    CHECK(r.convolved == 1);
    CHECK(r.skipped == 1);
    CHECK(r.flops == 4);  // two gather pairs, c_in = c_out = 1
}

TEST_CASE("SPSS skip branch forwards the re-weighted feature bit-exactly") {
    SparseTensor t = make_tensor({{0, 0, 0, 0}, {0, 0, 0, 1}}, {5.0f, 1.0f}, 1, {4, 4, 4});
    ConvWeights w = ConvWeights::filled(3, 1, 1, 1.0f);
    SparseTensor masked = mask_reweight(t, magnitude_map(t));
    SpssResult r = spss_conv_detail(t, {3, {1, 1, 1}}, w, 0.5, SelectionStrategy::magnitude());
    CHECK(r.out.at(1, 0) == masked.at(1, 0));  // bitwise: the skip branch copies
}

TEST_CASE("SPSS limit identities are bitwise") {
    SparseTensor t = random_tensor(83, {7, 7, 7}, 0.4, 3);
    ConvWeights w = ConvWeights::seeded_uniform(3, 3, 3, 21);
    SparseTensor masked = mask_reweight(t, magnitude_map(t));

    SpssResult all_skip = spss_conv_detail(t, {3, {1, 1, 1}}, w, 1.0, SelectionStrategy::magnitude());
    CHECK(all_skip.out.coords == t.coords);
    CHECK(all_skip.out.features == masked.features);
    CHECK(all_skip.flops == 0);

    SpssResult all_conv = spss_conv_detail(t, {3, {1, 1, 1}}, w, 0.0, SelectionStrategy::magnitude());
    SparseTensor ref = subm_conv(masked, {3, {1, 1, 1}}, w);
    CHECK(all_conv.out.coords == ref.coords);
    CHECK(all_conv.out.features == ref.features);
}

TEST_CASE("SPSS preconditions: square channels, unit stride") {
    SparseTensor t = make_tensor({{0, 0, 0, 0}}, {1.0f}, 1, {4, 4, 4});
    CHECK_THROWS_AS(
        spss_conv(t, {3, {1, 1, 1}}, ConvWeights::filled(3, 1, 2, 1.0f), 0.5,
                  SelectionStrategy::magnitude()),
        config_error);
    CHECK_THROWS_AS(
        spss_conv(t, {3, {2, 2, 2}}, ConvWeights::filled(3, 1, 1, 1.0f), 0.5,
                  SelectionStrategy::magnitude()),
        std::invalid_argument);
}

TEST_CASE("SPSS on an empty tensor is empty") {
    SparseTensor t = make_tensor({}, {}, 1, {4, 4, 4});
    SpssResult r = spss_conv_detail(t, {3, {1, 1, 1}}, ConvWeights::filled(3, 1, 1, 1.0f), 0.5,
                                    SelectionStrategy::magnitude());
    CHECK(r.out.size() == 0);
    CHECK(r.flops == 0);
}

TEST_CASE("SPRS at ratio 0 is exactly the regular convolution") {
    SparseTensor t = random_tensor(91, {8, 8, 8}, 0.35, 2);
    ConvWeights w = ConvWeights::seeded_uniform(3, 2, 4, 33);
    KernelSpec spec{3, {2, 2, 2}};
    SprsResult r = sprs_conv_detail(t, spec, w, 0.0, SelectionStrategy::magnitude());
    SparseTensor ref = regular_conv(t, spec, w);
    CHECK(r.out.coords == ref.coords);
    CHECK(r.out.features == ref.features);  // same rulebook, same accumulation order
    CHECK(r.suppressed == 0);
}

TEST_CASE("SPRS single-voxel micro-cases, end to end") {
    ConvWeights w = ConvWeights::filled(3, 1, 1, 1.0f);
    KernelSpec spec{3, {2, 2, 2}};

    SparseTensor centre = make_tensor({{0, 1, 1, 1}}, {1.0f}, 1, {4, 4, 4});
    SprsResult eight = sprs_conv_detail(centre, spec, w, 0.0, SelectionStrategy::magnitude());
    REQUIRE(eight.out_positions == 8);
    for (int64_t i = 0; i < 8; ++i) CHECK(eight.out.at(i, 0) == doctest::Approx(1.0f));
    CHECK(eight.suppressed == 0);

    SprsResult none = sprs_conv_detail(centre, spec, w, 1.0, SelectionStrategy::magnitude());
    CHECK(none.out_positions == 0);
    CHECK(none.out.size() == 0);
    CHECK(none.suppressed == 8);  // all eight candidates denied

    SparseTensor aligned = make_tensor({{0, 2, 2, 2}}, {1.0f}, 1, {4, 4, 4});
    SprsResult one = sprs_conv_detail(aligned, spec, w, 1.0, SelectionStrategy::magnitude());
    REQUIRE(one.out_positions == 1);
    CHECK(one.out.coords[0] == Coord{0, 1, 1, 1});
    CHECK(one.out.at(0, 0) == doctest::Approx(1.0f));
}

TEST_CASE("SPRS at ratio 1 keeps stride-surviving rows with full gathers") {
    // Three diagonal voxels; only (0,0,0) and (2,2,2) survive the stride
    // mask. Each retained output still gathers every active neighbor, so
    // both see the middle voxel (1,1,1) as well.
    SparseTensor t = make_tensor({{0, 0, 0, 0}, {0, 1, 1, 1}, {0, 2, 2, 2}},
                                 {1.0f, 1.0f, 1.0f}, 1, {4, 4, 4});
    ConvWeights w = ConvWeights::filled(3, 1, 1, 1.0f);
    SprsResult r = sprs_conv_detail(t, {3, {2, 2, 2}}, w, 1.0, SelectionStrategy::magnitude());
    REQUIRE(r.out_positions == 2);
    CHECK(r.out.coords[0] == Coord{0, 0, 0, 0});
    CHECK(r.out.coords[1] == Coord{0, 1, 1, 1});
    CHECK(r.out.at(0, 0) == doctest::Approx(2.0f));  // itself + centre voxel
    CHECK(r.out.at(1, 0) == doctest::Approx(2.0f));
    CHECK(r.suppressed == 8 - 2);  // unrestricted candidates form {0,2}^3
}

TEST_CASE("SPRS positions are subsets of regular, nested in the ratio") {
    KernelSpec spec{3, {2, 2, 2}};
    ConvWeights w = ConvWeights::seeded_uniform(3, 1, 1, 3);
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        SparseTensor t = random_tensor(seed, {8, 8, 8}, 0.3, 1, 0.1f, 1.0f);
        SparseTensor base = regular_conv(t, spec, w);
        CoordSet prev(base.coords.begin(), base.coords.end());
        for (double r : {0.25, 0.5, 0.75, 1.0}) {
            SprsResult pr = sprs_conv_detail(t, spec, w, r, SelectionStrategy::magnitude());
            for (const Coord& c : pr.out.coords) CHECK(prev.count(c) == 1);  // nested
            prev = CoordSet(pr.out.coords.begin(), pr.out.coords.end());
            CHECK(pr.suppressed == int64_t(base.coords.size()) - pr.out_positions);
        }
    }
}
