#include "doctest.h"
#include "support.hpp"

#include "loadclust/format.hpp"
#include "loadclust/profiles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace loadclust;

namespace {

std::string csv_for(const std::vector<std::tuple<std::string, std::string, int, double>>& rows)
{
    std::string text = "household_id,date,hour,kwh\n";
    for (const auto& [id, date, hour, kwh] : rows) {
        text += id + "," + date + "," + std::to_string(hour) + "," + format_double(kwh) + "\n";
    }
    return text;
}

IngestResult parse_text(const std::string& text, int r = 1)
{
    std::istringstream in(text);
    return parse_csv(in, r);
}

std::string full_days(const std::string& id, int days, double kwh)
{
    std::string text;
    CivilDate date{2018, 1, 1};
    for (int d = 0; d < days; ++d, date = date.next()) {
        for (int h = 0; h < 24; ++h) {
            text += id + "," + date.to_string() + "," + std::to_string(h) + "," + format_double(kwh + 0.01 * h) + "\n";
        }
    }
    return text;
}

RawDataset constant_household(const std::string& id, int days, std::vector<double> day_values, int r = 1)
{
    RawDataset raw;
    raw.resolution = r;
    CivilDate date{2018, 3, 1};
    for (int d = 0; d < days; ++d, date = date.next()) {
        for (int s = 0; s < 24 / r; ++s) {
            raw.readings.push_back({id, date, s * r, day_values[static_cast<std::size_t>(d * (24 / r) + s) % day_values.size()]});
        }
    }
    return raw;
}

}  // namespace

TEST_SUITE("profiles")
{
    TEST_CASE("civil dates parse strictly and roll over months and leap years")
    {
        CHECK(CivilDate::parse("2018-01-31").next() == CivilDate{2018, 2, 1});
        CHECK(CivilDate::parse("2020-02-28").next() == CivilDate{2020, 2, 29});
        CHECK(CivilDate::parse("2019-02-28").next() == CivilDate{2019, 3, 1});
        CHECK(CivilDate::parse("2018-12-31").next() == CivilDate{2019, 1, 1});
        CHECK(CivilDate{2018, 5, 7}.to_string() == "2018-05-07");
        CHECK_THROWS_AS(CivilDate::parse("2018-1-01"), ValueError);
        CHECK_THROWS_AS(CivilDate::parse("2018-02-30"), ValueError);
        CHECK_THROWS_AS(CivilDate::parse("2018-13-01"), ValueError);
    }

    TEST_CASE("two households with two complete days give 96 readings")
    {
        const auto result = parse_text("household_id,date,hour,kwh\n" + full_days("h1", 2, 0.5) + full_days("h2", 2, 0.7));
        CHECK(result.dataset.readings.size() == 96);
        CHECK(result.dataset.household_ids() == std::vector<std::string>{"h1", "h2"});
        CHECK(result.skipped_rows == 0);
    }

    TEST_CASE("a duplicated key raises an error naming the key")
    {
        const std::string text = csv_for({{"h1", "2018-01-01", 0, 1.0}, {"h1", "2018-01-01", 0, 2.0}});
        try {
            parse_text(text);
            FAIL("expected DuplicateKeyError");
        } catch (const DuplicateKeyError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("h1") != std::string::npos);
            CHECK(msg.find("2018-01-01") != std::string::npos);
        }
    }

    TEST_CASE("header, negative and malformed rows")
    {
        CHECK_THROWS_AS(parse_text("id,date,hour,kwh\n"), FormatError);
        CHECK_THROWS_AS(parse_text(""), FormatError);
        CHECK_THROWS_AS(parse_text(csv_for({{"h1", "2018-01-01", 0, -0.5}})), ValueError);
        const auto result = parse_text(
            "household_id,date,hour,kwh\n"
            "h1,2018-01-01,0,1.0\n"
            "h1,2018-01-01,1\n"        // too few fields
            "h1,2018-01-xx,2,1.0\n"    // bad date
            "h1,2018-01-01,24,1.0\n"   // hour out of range
            "h1,2018-01-01,3,abc\n"    // bad kwh
            "h1,2018-01-01,4,nan\n"    // non-finite
            "h1,2018-01-01,5,0.25\r\n");
        CHECK(result.dataset.readings.size() == 2);
        CHECK(result.skipped_rows == 5);
    }

    TEST_CASE("hours off the resolution grid are skipped")
    {
        const auto result = parse_text(csv_for({{"h1", "2018-01-01", 0, 1.0}, {"h1", "2018-01-01", 6, 1.0}, {"h1", "2018-01-01", 12, 1.0}}), 12);
        CHECK(result.dataset.readings.size() == 2);
        CHECK(result.skipped_rows == 1);
    }

    TEST_CASE("an incomplete day is kept as readings and dropped at day-matrix construction")
    {
        // Fixed 3-day fixture: h1 complete on all three days, h2 misses hour 23 on day 2.
        std::string text = "household_id,date,hour,kwh\n" + full_days("h1", 3, 0.4);
        CivilDate date{2018, 1, 1};
        for (int d = 0; d < 3; ++d, date = date.next()) {
            for (int h = 0; h < 24; ++h) {
                if (d == 1 && h == 23) {
                    continue;
                }
                text += "h2," + date.to_string() + "," + std::to_string(h) + ",0.3\n";
            }
        }
        const auto result = parse_text(text);
        // 72 rows for h1 plus 71 for h2, counted by hand.
        CHECK(result.dataset.readings.size() == 143);
        const auto days = build_day_matrices(result.dataset);
        REQUIRE(days.size() == 2);
        CHECK(days[0].days() == 3);
        CHECK(days[1].days() == 2);
        CHECK(days[1].day_ids == std::vector<CivilDate>{{2018, 1, 1}, {2018, 1, 3}});
    }

    TEST_CASE("a household with no complete day is a precondition error")
    {
        RawDataset raw;
        raw.readings.push_back({"h9", {2018, 1, 1}, 0, 1.0});
        CHECK_THROWS_AS(build_day_matrices(raw), PreconditionError);
    }

    TEST_CASE("csv write then parse reproduces the readings exactly")
    {
        const auto raw = generate_synthetic({4, 3, 2, 0.3, 99});
        std::ostringstream out;
        write_csv(raw, out);
        const auto back = parse_text(out.str());
        REQUIRE(back.dataset.readings.size() == raw.readings.size());
        for (std::size_t i = 0; i < raw.readings.size(); ++i) {
            CHECK(back.dataset.readings[i].kwh == raw.readings[i].kwh);
            CHECK(back.dataset.readings[i].date == raw.readings[i].date);
        }
    }

    TEST_CASE("constant days give the uniform unit profile")
    {
        RawDataset raw = constant_household("a", 3, {1.0});
        const auto other = constant_household("b", 3, {2.0});
        raw.readings.insert(raw.readings.end(), other.readings.begin(), other.readings.end());
        const auto p = preprocess(raw);
        REQUIRE(p.data.rows() == 2);
        for (int c = 0; c < 24; ++c) {
            CHECK(p.data(0, c) == doctest::Approx(1.0 / std::sqrt(24.0)).epsilon(1e-12));
        }
    }

    TEST_CASE("two-slot toy: median of odd count and unit axis")
    {
        // Days (1,0), (3,0), (5,0) at r = 12.
        RawDataset raw = constant_household("t", 3, {1, 0, 3, 0, 5, 0}, 12);
        const auto other = constant_household("u", 3, {1, 1}, 12);
        raw.readings.insert(raw.readings.end(), other.readings.begin(), other.readings.end());
        const auto p = preprocess(raw);
        REQUIRE(p.data.cols() == 2);
        CHECK(p.data(0, 0) == doctest::Approx(1.0));
        CHECK(p.data(0, 1) == doctest::Approx(0.0));
    }

    TEST_CASE("even counts use the mean of the two central values")
    {
        Matrix days(4, 1);
        days << 1, 7, 3, 100;
        CHECK(median_profile(days)(0) == doctest::Approx(5.0));
    }

    TEST_CASE("a zero median profile is a degenerate error naming the household")
    {
        RawDataset raw = constant_household("quiet", 3, {0.0});
        auto more = constant_household("busy", 3, {1.0});
        raw.readings.insert(raw.readings.end(), more.readings.begin(), more.readings.end());
        try {
            preprocess(raw);
            FAIL("expected DegenerateError");
        } catch (const DegenerateError& e) {
            CHECK(std::string(e.what()).find("quiet") != std::string::npos);
        }
    }

    TEST_CASE("synthetic default shape is 27 x 24 with 90 complete days each")
    {
        const auto raw = generate_synthetic({});
        const auto days = build_day_matrices(raw);
        CHECK(days.size() == 27);
        for (const auto& d : days) {
            CHECK(d.days() == 90);
        }
        const auto p = preprocess(days);
        CHECK(p.data.rows() == 27);
        CHECK(p.data.cols() == 24);
        CHECK(raw.ground_truth.size() == 27);
    }

    TEST_CASE("synthetic generation is byte-identical for a fixed seed")
    {
        std::ostringstream a;
        std::ostringstream b;
        write_csv(generate_synthetic({27, 90, 4, 0.3, 7}), a);
        write_csv(generate_synthetic({27, 90, 4, 0.3, 7}), b);
        CHECK(a.str() == b.str());
        std::ostringstream c;
        write_csv(generate_synthetic({27, 90, 4, 0.3, 8}), c);
        CHECK(a.str() != c.str());
    }

    TEST_CASE("noise-free synthetic days equal the base shape")
    {
        const auto raw = generate_synthetic({8, 5, 4, 0.0, 3});
        for (const auto& d : build_day_matrices(raw)) {
            const auto shape = archetype_shape(raw.ground_truth.at(d.household_id));
            for (int r = 0; r < d.days(); ++r) {
                for (int h = 0; h < 24; ++h) {
                    CHECK(d.rows(r, h) == shape[static_cast<std::size_t>(h)]);
                }
            }
        }
    }

    TEST_CASE("synthetic argument checks")
    {
        CHECK_THROWS_AS(generate_synthetic({3, 5, 4, 0.1, 1}), ArgumentError);
        CHECK_THROWS_AS(generate_synthetic({3, 0, 2, 0.1, 1}), ArgumentError);
        CHECK_THROWS_AS(generate_synthetic({3, 5, 2, -0.1, 1}), ArgumentError);
    }

    TEST_CASE("archetypes beyond four rotate the base shapes and stay distinct")
    {
        for (int i = 0; i < 12; ++i) {
            for (int j = i + 1; j < 12; ++j) {
                CHECK(archetype_shape(i) != archetype_shape(j));
            }
        }
        const auto base = archetype_shape(1);
        const auto shifted = archetype_shape(5);
        for (int h = 0; h < 24; ++h) {
            CHECK(shifted[static_cast<std::size_t>((h + 3) % 24)] == base[static_cast<std::size_t>(h)]);
        }
        CHECK(archetype_name(5) == "evening_peak_shift3h");
    }

    TEST_CASE("the archetype data file mirrors the compiled constants")
    {
        std::ifstream in(std::string(LOADCLUST_DATA_DIR) + "/archetypes.csv");
        REQUIRE(in.good());
        std::string line;
        std::getline(in, line);
        CHECK(line.rfind("name,h00,", 0) == 0);
        int index = 0;
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string cell;
            std::getline(row, cell, ',');
            CHECK(cell == archetype_name(index));
            const auto shape = archetype_shape(index);
            for (int h = 0; h < 24; ++h) {
                REQUIRE(std::getline(row, cell, ','));
                CHECK(parse_double(cell) == shape[static_cast<std::size_t>(h)]);
            }
            ++index;
        }
        CHECK(index == 4);
    }

    TEST_CASE("property: preprocessed rows have unit norm")
    {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const auto p = preprocess(generate_synthetic({12, 9, 4, 0.5, seed}));
            for (Eigen::Index r = 0; r < p.data.rows(); ++r) {
                CHECK(std::abs(p.data.row(r).norm() - 1.0) < 1e-9);
            }
        }
    }

    TEST_CASE("property: preprocess ignores reading order and day order")
    {
        auto raw = generate_synthetic({6, 7, 3, 0.4, 12});
        const auto reference = preprocess(raw);
        Rng rng(77);
        rng.shuffle(std::span<Reading>(raw.readings));
        const auto shuffled = preprocess(raw);
        CHECK(shuffled.household_ids == reference.household_ids);
        CHECK(shuffled.data == reference.data);
        // Reassigning dates permutes the days of every household.
        for (auto& r : raw.readings) {
            r.date.day = 29 - r.date.day;
        }
        CHECK(preprocess(raw).data == reference.data);
    }

    TEST_CASE("property: scaling one household's kWh leaves its profile unchanged")
    {
        auto raw = generate_synthetic({5, 6, 2, 0.4, 21});
        const auto reference = preprocess(raw);
        for (auto& r : raw.readings) {
            if (r.household_id == reference.household_ids[2]) {
                r.kwh *= 3.7;
            }
        }
        const auto scaled = preprocess(raw);
        for (Eigen::Index r = 0; r < reference.data.rows(); ++r) {
            CHECK((scaled.data.row(r) - reference.data.row(r)).norm() < 1e-12);
        }
    }

    TEST_CASE("property: median is invariant under day permutation")
    {
        const Matrix days = testing::lcg_matrix(9, 24, 31);
        const Vector ref = median_profile(days);
        Rng rng(5);
        for (int t = 0; t < 10; ++t) {
            std::vector<int> order(9);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(std::span<int>(order));
            Matrix permuted(9, 24);
            for (int i = 0; i < 9; ++i) {
                permuted.row(i) = days.row(order[static_cast<std::size_t>(i)]);
            }
            CHECK(median_profile(permuted) == ref);
        }
    }
}
