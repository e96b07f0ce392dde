#include "gmind/error.hpp"
#include "gmind/evaluation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <fstream>

using namespace gmind;

TEST_SUITE("evaluation") {

TEST_CASE("summary uses the population std") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
    CHECK(s.n == 4);
    CHECK(format_summary({1.0149, 2.7551, Unit::pixels, 2}) == "1.01 ± 2.76");
    CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
}

TEST_CASE("error map") {
    const auto reg = DisplacementField::constant(4, 3, -2.0, 1.0);
    const auto dist = DisplacementField::constant(4, 3, 2.0, -1.0);
    const auto exact = registration_error_map(reg, dist);
    for (double v : exact.values()) CHECK(v == 0.0);
    const auto off = registration_error_map(DisplacementField::constant(4, 3, 1.0, 3.0), DisplacementField(4, 3));
    for (double v : off.values()) CHECK(v == doctest::Approx(std::sqrt(10.0)));
    CHECK_THROWS_AS(registration_error_map(reg, DisplacementField(3, 4)), Error);
}

TEST_CASE("TRE of a 3-4-5 triangle") {
    LandmarkSet fixed{{{10.0, 10.0}}, std::nullopt};
    LandmarkSet moving{{{13.0, 14.0}}, std::nullopt};
    auto r = tre(fixed, moving, DisplacementField(32, 32));
    CHECK(r.per_landmark_px[0] == doctest::Approx(5.0));
    CHECK_FALSE(r.mm.has_value());

    fixed.mm_per_pixel = 0.5;
    r = tre(fixed, moving, DisplacementField(32, 32));
    REQUIRE(r.mm.has_value());
    CHECK(r.mm->mean == doctest::Approx(2.5));
    CHECK(r.mm->unit == Unit::mm);

    // a perfect field
    r = tre(fixed, moving, DisplacementField::constant(32, 32, 3.0, 4.0));
    CHECK(r.pixels.mean == doctest::Approx(0.0));
}

TEST_CASE("TRE samples the field bilinearly and checks inputs") {
    DisplacementField f(4, 4);
    f.ux(1, 1) = 2.0;
    const LandmarkSet a{{{1.5, 1.0}}, std::nullopt};
    const LandmarkSet b{{{2.5, 1.0}}, std::nullopt};
    CHECK(tre(a, b, f).per_landmark_px[0] == doctest::Approx(0.0));

    const LandmarkSet two{{{1, 1}, {2, 2}}, std::nullopt};
    CHECK_THROWS_AS(tre(a, two, f), Error);
    const LandmarkSet outside{{{5.0, 1.0}}, std::nullopt};
    CHECK_THROWS_AS(tre(outside, b, f), Error);
    CHECK_THROWS_AS(tre(LandmarkSet{}, LandmarkSet{}, f), Error);
}

TEST_CASE("percentile interpolates") {
    CHECK(percentile({3.0, 1.0, 2.0, 4.0}, 50.0) == 2.5);
    CHECK(percentile({5.0}, 90.0) == 5.0);
    CHECK(percentile({0.0, 10.0}, 90.0) == doctest::Approx(9.0));
    CHECK_THROWS_AS(percentile({}, 50.0), Error);
}

TEST_CASE("edge mask") {
    Image step(20, 8, 0.0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 10; x < 20; ++x) step(x, y) = 100.0;
    }
    const auto m = edge_mask(step, 90.0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 20; ++x) {
            // gradient is non-zero on columns 9 and 10; dilation adds 8 and 11
            CHECK(m(x, y) == (x >= 8 && x <= 11));
        }
    }
    CHECK(edge_mask(Image(6, 6, 7.0), 90.0).count() == 0);

    // a tiny percentile still needs a strictly larger magnitude
    const auto all = edge_mask(step, 1e-9);
    CHECK(all.count() == m.count());
    CHECK_THROWS_AS(edge_mask(step, 0.0), Error);
    CHECK_THROWS_AS(edge_mask(step, 100.0), Error);
    CHECK_THROWS_AS(edge_mask(Image(1, 5), 50.0), Error);
}

TEST_CASE("masked statistics") {
    const ScalarField e(3, 1, std::vector<double>{1.0, 5.0, 3.0});
    const Mask m{3, 1, {1, 0, 1}};
    const auto s = masked_error_stats(e, m);
    CHECK(s.mean == 2.0);
    CHECK(s.std == 1.0);
    CHECK(s.n == 2);
    CHECK_THROWS_AS(masked_error_stats(e, Mask{3, 1, {0, 0, 0}}), Error);
    CHECK_THROWS_AS(masked_error_stats(e, Mask{1, 3, {1, 1, 1}}), Error);
}

TEST_CASE("landmark CSV") {
    const auto dir = oracle::scratch_dir("landmarks");
    {
        std::ofstream out(dir / "a.csv");
        out << "x,y\n# comment\n1.5, 2\n\n3,4.25\n";
    }
    const auto set = read_landmarks_csv(dir / "a.csv");
    REQUIRE(set.points.size() == 2);
    CHECK(set.points[0].x == 1.5);
    CHECK(set.points[1].y == 4.25);

    write_landmarks_csv(set, dir / "b.csv");
    const auto again = read_landmarks_csv(dir / "b.csv");
    REQUIRE(again.points.size() == 2);
    CHECK(again.points[1].x == 3.0);

    {
        std::ofstream out(dir / "bad.csv");
        out << "1,2\nthree,4\n";
    }
    CHECK_THROWS_AS(read_landmarks_csv(dir / "bad.csv"), Error);
    try {
        read_landmarks_csv(dir / "missing.csv");
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::missing_file);
    }
}

} // TEST_SUITE
