#include "loadclust/profiles.hpp"

#include "loadclust/format.hpp"
#include "loadclust/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <tuple>

namespace loadclust {

namespace {

bool is_leap(int y)
{
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m)
{
    static constexpr std::array<int, 12> days{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : days[static_cast<std::size_t>(m - 1)];
}

template <typename T>
std::optional<T> parse_number(std::string_view text)
{
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        return std::nullopt;
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

void validate_resolution(int resolution)
{
    if (resolution < 1 || resolution > 24 || 24 % resolution != 0) {
        throw ArgumentError("resolution must divide 24, got " + std::to_string(resolution));
    }
}

// Base shapes in kWh per hour; mirrored in data/archetypes.csv.
constexpr std::array<std::array<double, 24>, 4> kBaseShapes{{
    // morning peak
    {0.20, 0.20, 0.20, 0.20, 0.20, 0.25, 0.60, 1.20, 1.00, 0.60, 0.30, 0.30,
     0.30, 0.30, 0.30, 0.30, 0.30, 0.40, 0.40, 0.40, 0.40, 0.40, 0.25, 0.20},
    // evening peak
    {0.20, 0.20, 0.20, 0.20, 0.20, 0.20, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25,
     0.25, 0.25, 0.25, 0.25, 0.40, 0.80, 1.40, 1.50, 1.20, 0.80, 0.50, 0.30},
    // daytime flat
    {0.30, 0.30, 0.30, 0.30, 0.30, 0.30, 0.30, 0.60, 0.60, 0.60, 0.60, 0.60,
     0.60, 0.60, 0.60, 0.60, 0.60, 0.60, 0.60, 0.60, 0.60, 0.60, 0.60, 0.30},
    // double peak
    {0.20, 0.20, 0.20, 0.20, 0.20, 0.20, 0.50, 1.00, 0.90, 0.40, 0.30, 0.30,
     0.30, 0.30, 0.30, 0.30, 0.30, 0.60, 1.10, 1.20, 0.90, 0.50, 0.30, 0.20},
}};

constexpr std::array<std::string_view, 4> kBaseNames{"morning_peak", "evening_peak", "daytime_flat", "double_peak"};

constexpr int kRotationHours = 3;

}  // namespace

CivilDate CivilDate::parse(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ValueError("bad date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    auto y = parse_number<int>(text.substr(0, 4));
    auto m = parse_number<int>(text.substr(5, 2));
    auto d = parse_number<int>(text.substr(8, 2));
    if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1 || *d > days_in_month(*y, *m)) {
        throw ValueError("bad date '" + std::string(text) + "'");
    }
    return CivilDate{*y, *m, *d};
}

std::string CivilDate::to_string() const
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

CivilDate CivilDate::next() const
{
    CivilDate out = *this;
    if (++out.day > days_in_month(out.year, out.month)) {
        out.day = 1;
        if (++out.month > 12) {
            out.month = 1;
            ++out.year;
        }
    }
    return out;
}

std::vector<std::string> RawDataset::household_ids() const
{
    std::set<std::string> ids;
    for (const auto& r : readings) {
        ids.insert(r.household_id);
    }
    return {ids.begin(), ids.end()};
}

IngestResult parse_csv(std::istream& in, int resolution)
{
    validate_resolution(resolution);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("empty input, expected header '" + std::string(kCsvHeader) + "'");
    }
    if (line.starts_with("\xEF\xBB\xBF")) {
        line.erase(0, 3);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw FormatError("bad header '" + line + "', expected '" + std::string(kCsvHeader) + "'");
    }

    IngestResult result;
    result.dataset.resolution = resolution;
    std::set<std::tuple<std::string, CivilDate, int>> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 4 || fields[0].empty()) {
            ++result.skipped_rows;
            continue;
        }
        CivilDate date;
        try {
            date = CivilDate::parse(fields[1]);
        } catch (const ValueError&) {
            ++result.skipped_rows;
            continue;
        }
        const auto hour = parse_number<int>(fields[2]);
        const auto kwh = parse_number<double>(fields[3]);
        if (!hour || *hour < 0 || *hour >= 24 || *hour % resolution != 0 || !kwh || !std::isfinite(*kwh)) {
            ++result.skipped_rows;
            continue;
        }
        if (*kwh < 0.0) {
            throw ValueError("negative kwh " + std::string(fields[3]) + " on line " + std::to_string(line_no));
        }
        std::string id(fields[0]);
        if (!seen.emplace(id, date, *hour).second) {
            throw DuplicateKeyError("duplicate reading (" + id + ", " + date.to_string() + ", " +
                                    std::to_string(*hour) + ") on line " + std::to_string(line_no));
        }
        result.dataset.readings.push_back(Reading{std::move(id), date, *hour, *kwh});
    }
    return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, int resolution)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    return parse_csv(in, resolution);
}

void write_csv(const RawDataset& raw, std::ostream& out)
{
    out << kCsvHeader << '\n';
    for (const auto& r : raw.readings) {
        out << r.household_id << ',' << r.date.to_string() << ',' << r.hour << ',' << format_double(r.kwh) << '\n';
    }
}

void write_csv(const RawDataset& raw, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write " + path.string());
    }
    write_csv(raw, out);
}

std::vector<DayMatrix> build_day_matrices(const RawDataset& raw)
{
    validate_resolution(raw.resolution);
    const int slots = raw.slots_per_day();
    std::map<std::string, std::map<CivilDate, std::vector<std::optional<double>>>> grouped;
    for (const auto& r : raw.readings) {
        auto& day = grouped[r.household_id][r.date];
        if (day.empty()) {
            day.resize(static_cast<std::size_t>(slots));
        }
        day[static_cast<std::size_t>(r.hour / raw.resolution)] = r.kwh;
    }

    std::vector<DayMatrix> out;
    out.reserve(grouped.size());
    for (auto& [id, days] : grouped) {
        DayMatrix dm;
        dm.household_id = id;
        std::vector<const std::vector<std::optional<double>>*> complete;
        for (const auto& [date, values] : days) {
            if (std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); })) {
                dm.day_ids.push_back(date);
                complete.push_back(&values);
            }
        }
        if (complete.empty()) {
            throw PreconditionError("household " + id + " has no complete day");
        }
        dm.rows.resize(static_cast<Eigen::Index>(complete.size()), slots);
        for (std::size_t i = 0; i < complete.size(); ++i) {
            for (int s = 0; s < slots; ++s) {
                dm.rows(static_cast<Eigen::Index>(i), s) = *(*complete[i])[static_cast<std::size_t>(s)];
            }
        }
        out.push_back(std::move(dm));
    }
    return out;
}

Vector median_profile(const Matrix& days)
{
    if (days.rows() == 0) {
        throw ArgumentError("median of zero rows");
    }
    Vector out(days.cols());
    std::vector<double> column(static_cast<std::size_t>(days.rows()));
    const std::size_t n = column.size();
    for (Eigen::Index c = 0; c < days.cols(); ++c) {
        for (std::size_t r = 0; r < n; ++r) {
            column[r] = days(static_cast<Eigen::Index>(r), c);
        }
        std::sort(column.begin(), column.end());
        out(c) = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
    return out;
}

Vector l2_normalized(const Vector& v, std::string_view owner)
{
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DegenerateError("median profile of household " + std::string(owner) +
                              " is the zero vector; l2 normalization undefined");
    }
    return v / norm;
}

ProfileMatrix preprocess(const std::vector<DayMatrix>& days)
{
    if (days.size() < 2) {
        throw PreconditionError("need at least 2 households, got " + std::to_string(days.size()));
    }
    ProfileMatrix out;
    out.data.resize(static_cast<Eigen::Index>(days.size()), days.front().rows.cols());
    for (std::size_t i = 0; i < days.size(); ++i) {
        out.data.row(static_cast<Eigen::Index>(i)) =
            l2_normalized(median_profile(days[i].rows), days[i].household_id).transpose();
        out.household_ids.push_back(days[i].household_id);
    }
    return out;
}

ProfileMatrix preprocess(const RawDataset& raw)
{
    return preprocess(build_day_matrices(raw));
}

std::vector<double> archetype_shape(int index)
{
    if (index < 0) {
        throw ArgumentError("archetype index must be non-negative");
    }
    const auto& base = kBaseShapes[static_cast<std::size_t>(index % 4)];
    const int shift = (kRotationHours * (index / 4)) % 24;
    std::vector<double> out(24);
    for (int h = 0; h < 24; ++h) {
        out[static_cast<std::size_t>((h + shift) % 24)] = base[static_cast<std::size_t>(h)];
    }
    return out;
}

std::string archetype_name(int index)
{
    std::string name(kBaseNames[static_cast<std::size_t>(index % 4)]);
    if (index >= 4) {
        name += "_shift" + std::to_string(kRotationHours * (index / 4) % 24) + "h";
    }
    return name;
}

RawDataset generate_synthetic(const SyntheticSpec& spec)
{
    if (spec.households < 1 || spec.days < 1 || spec.archetypes < 1) {
        throw ArgumentError("households, days and archetypes must be positive");
    }
    if (spec.archetypes > spec.households) {
        throw ArgumentError("archetypes (" + std::to_string(spec.archetypes) + ") exceed households (" +
                            std::to_string(spec.households) + ")");
    }
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
        throw ArgumentError("noise_sigma must be a non-negative finite number");
    }

    RawDataset raw;
    raw.resolution = 1;
    raw.readings.reserve(static_cast<std::size_t>(spec.households) * static_cast<std::size_t>(spec.days) * 24);
    const int width = static_cast<int>(std::to_string(spec.households).size());

    for (int h = 0; h < spec.households; ++h) {
        std::string number = std::to_string(h + 1);
        const std::string id = "h" + std::string(static_cast<std::size_t>(width) - number.size(), '0') + number;
        const int archetype = h % spec.archetypes;
        raw.ground_truth[id] = archetype;
        const auto shape = archetype_shape(archetype);

        Rng rng = Rng::substream(spec.seed, {static_cast<std::uint64_t>(h)});
        CivilDate date{2018, 1, 1};
        for (int d = 0; d < spec.days; ++d) {
            for (int hour = 0; hour < 24; ++hour) {
                double kwh = shape[static_cast<std::size_t>(hour)];
                if (spec.noise_sigma > 0.0) {
                    kwh *= std::exp(spec.noise_sigma * rng.normal());
                }
                raw.readings.push_back(Reading{id, date, hour, kwh});
            }
            date = date.next();
        }
    }
    return raw;
}

}  // namespace loadclust
