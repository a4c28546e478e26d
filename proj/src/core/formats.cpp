#include "formats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <json.hpp>

namespace mxmse {

int FloatFormatSpec::effective_bias() const {
    if (bias) return *bias;
    return (1 << (exponent_bits - 1)) - 1;
}

int FloatFormatSpec::bit_width() const {
    if (kind == FormatKind::IntegerSymmetric) {
        int b = 1;
        while (((std::int64_t{1} << b) - 1) < int_max) ++b;
        return b + 1; // sign bit
    }
    if (kind == FormatKind::Exact) return 0;
    return exponent_bits + mantissa_bits + (is_signed ? 1 : 0);
}

void FloatFormatSpec::validate() const {
    switch (kind) {
    case FormatKind::Exact:
        return;
    case FormatKind::IntegerSymmetric:
        require(int_max >= 1, errc::invalid_argument,
                "integer format '" + name + "' needs int_max >= 1");
        return;
    case FormatKind::Minifloat:
        require(exponent_bits >= 1, errc::invalid_argument,
                "format '" + name + "' needs at least one exponent bit");
        require(mantissa_bits >= 0, errc::invalid_argument,
                "format '" + name + "' has negative mantissa width");
        require(bit_width() >= 1, errc::invalid_argument,
                "format '" + name + "' has zero total bits");
        require(exponent_bits + mantissa_bits <= 24, errc::invalid_argument,
                "format '" + name + "' is too wide to enumerate");
        return;
    }
    fail(errc::invalid_argument, "unknown format kind");
}

std::size_t LevelTable::zero_index() const {
    require(zero_index_ >= 0, errc::invalid_argument, "format '" + name + "' has no zero level");
    return static_cast<std::size_t>(zero_index_);
}

std::size_t LevelTable::round_index(double x) const {
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - boundaries.begin());
    if (idx > 0 && x == boundaries[idx - 1]) {
        // exact tie between levels idx-1 and idx
        const std::size_t lo = idx - 1, hi = idx;
        if (rounding == Rounding::NearestTiesAway) {
            return std::fabs(levels[hi]) >= std::fabs(levels[lo]) ? hi : lo;
        }
        if ((codes[lo] & 1u) == 0u) return lo;
        if ((codes[hi] & 1u) == 0u) return hi;
        return lo;
    }
    return idx;
}

std::uint32_t LevelTable::code_of_level(double level) const {
    const auto it = std::lower_bound(levels.begin(), levels.end(), level);
    require(it != levels.end() && *it == level, errc::invalid_argument,
            "value is not a level of format '" + name + "'");
    return codes[static_cast<std::size_t>(it - levels.begin())];
}

double LevelTable::level_of_code(std::uint32_t code) const {
    for (std::size_t i = 0; i < codes.size(); ++i)
        if (codes[i] == code) return levels[i];
    fail(errc::invalid_argument, "unknown code for format '" + name + "'");
}

namespace {

void append_minifloat_levels(const FloatFormatSpec& spec,
                             std::vector<std::pair<double, std::uint32_t>>& out) {
    const int ebits = spec.exponent_bits;
    const int mbits = spec.mantissa_bits;
    const int bias = spec.effective_bias();
    const std::uint32_t emax = (1u << ebits) - 1u;
    const std::uint32_t mmax = (1u << mbits) - 1u;
    const double mant_scale = std::ldexp(1.0, -mbits);
    // Power-of-two formats (no mantissa, no subnormal row) have no zero:
    // every exponent code is a plain 2^(e-bias) value (E8M0 style).
    const bool pure_pot = (mbits == 0 && !spec.subnormals);

    const int signs = spec.is_signed ? 2 : 1;
    for (int s = 0; s < signs; ++s) {
        const double sgn = s ? -1.0 : 1.0;
        for (std::uint32_t e = 0; e <= emax; ++e) {
            for (std::uint32_t m = 0; m <= mmax; ++m) {
                if (spec.finite == FiniteConvention::ExtendedFinite && e == emax && m == mmax)
                    continue; // non-numeric code
                double value;
                if (e == 0 && !pure_pot) {
                    if (!spec.subnormals && m != 0) continue;
                    value = static_cast<double>(m) * mant_scale * std::ldexp(1.0, 1 - bias);
                } else {
                    value = std::ldexp(1.0 + static_cast<double>(m) * mant_scale,
                                       static_cast<int>(e) - bias);
                }
                const std::uint32_t code =
                    (static_cast<std::uint32_t>(s) << (ebits + mbits)) | (e << mbits) | m;
                out.emplace_back(sgn * value, code);
            }
        }
    }
}

} // namespace

LevelTable enumerate_levels(const FloatFormatSpec& spec) {
    spec.validate();
    require(spec.kind != FormatKind::Exact, errc::invalid_argument,
            "the exact scale kind has no level table");

    std::vector<std::pair<double, std::uint32_t>> pairs;
    if (spec.kind == FormatKind::IntegerSymmetric) {
        const int width = spec.bit_width();
        const std::uint32_t mask = (1u << width) - 1u;
        for (std::int64_t k = -spec.int_max; k <= spec.int_max; ++k)
            pairs.emplace_back(static_cast<double>(k),
                               static_cast<std::uint32_t>(k) & mask);
    } else {
        append_minifloat_levels(spec, pairs);
    }

    // Sort by value; deduplicate +-0, keeping the non-negative code.
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    LevelTable table;
    table.name = spec.name;
    table.rounding = Rounding::NearestEvenCode;
    table.bits = spec.bit_width();
    for (const auto& [value, code] : pairs) {
        const double v = (value == 0.0) ? 0.0 : value; // normalize -0.0
        if (!table.levels.empty() && table.levels.back() == v) continue;
        table.levels.push_back(v);
        table.codes.push_back(code);
    }
    require(!table.levels.empty(), errc::invalid_argument,
            "format '" + spec.name + "' has no numeric codes");

    table.boundaries.reserve(table.levels.size() - 1);
    for (std::size_t i = 0; i + 1 < table.levels.size(); ++i)
        table.boundaries.push_back(0.5 * (table.levels[i] + table.levels[i + 1]));

    table.max_value = std::max(std::fabs(table.levels.front()), std::fabs(table.levels.back()));
    for (std::size_t i = 0; i < table.levels.size(); ++i) {
        if (table.levels[i] == 0.0) table.zero_index_ = static_cast<std::int64_t>(i);
        if (table.levels[i] > 0.0 && table.min_positive == 0.0)
            table.min_positive = table.levels[i];
    }
    return table;
}

namespace {

FloatFormatSpec minifloat(std::string name, int ebits, int mbits, bool is_signed,
                          FiniteConvention finite, std::optional<int> bias = std::nullopt,
                          bool subnormals = true) {
    FloatFormatSpec s;
    s.name = std::move(name);
    s.kind = FormatKind::Minifloat;
    s.exponent_bits = ebits;
    s.mantissa_bits = mbits;
    s.is_signed = is_signed;
    s.finite = finite;
    s.bias = bias;
    s.subnormals = subnormals;
    return s;
}

const std::map<std::string, FloatFormatSpec>& registry() {
    static const std::map<std::string, FloatFormatSpec> map = [] {
        std::map<std::string, FloatFormatSpec> r;
        auto put = [&r](FloatFormatSpec s) { r[s.name] = std::move(s); };
        put(minifloat("e2m1", 2, 1, true, FiniteConvention::AllFinite));
        put(minifloat("e4m3", 4, 3, true, FiniteConvention::ExtendedFinite));
        put(minifloat("ue4m3", 4, 3, false, FiniteConvention::ExtendedFinite));
        put(minifloat("ue5m3", 5, 3, false, FiniteConvention::AllFinite));
        put(minifloat("ue4m4", 4, 4, false, FiniteConvention::AllFinite, 7));
        put(minifloat("ue5m1", 5, 1, false, FiniteConvention::AllFinite));
        put(minifloat("ue4m2", 4, 2, false, FiniteConvention::AllFinite));
        put(minifloat("e8m0", 8, 0, false, FiniteConvention::AllFinite, 127, false));
        put(minifloat("bf16", 8, 7, true, FiniteConvention::ExtendedFinite));
        FloatFormatSpec int4;
        int4.name = "int4";
        int4.kind = FormatKind::IntegerSymmetric;
        int4.int_max = 7;
        put(int4);
        FloatFormatSpec exact;
        exact.name = "exact";
        exact.kind = FormatKind::Exact;
        put(exact);
        return r;
    }();
    return map;
}

} // namespace

const std::vector<std::string>& registry_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, spec] : registry()) n.push_back(name);
        return n;
    }();
    return names;
}

bool registry_has(const std::string& name) { return registry().count(name) != 0; }

FloatFormatSpec registry_spec(const std::string& name) {
    const auto it = registry().find(name);
    require(it != registry().end(), errc::unknown_format, "unknown format '" + name + "'");
    return it->second;
}

LevelTable registry_table(const std::string& name) {
    return enumerate_levels(registry_spec(name));
}

FloatFormatSpec FloatFormatSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::parse_error, std::string("bad format JSON: ") + e.what());
    }
    FloatFormatSpec s;
    try {
        s.name = j.at("name").get<std::string>();
        const std::string kind = j.value("kind", "minifloat");
        if (kind == "minifloat") s.kind = FormatKind::Minifloat;
        else if (kind == "integer-symmetric") s.kind = FormatKind::IntegerSymmetric;
        else if (kind == "exact") s.kind = FormatKind::Exact;
        else fail(errc::parse_error, "unknown format kind '" + kind + "'");
        s.exponent_bits = j.value("exponent_bits", 0);
        s.mantissa_bits = j.value("mantissa_bits", 0);
        s.is_signed = j.value("signed", false);
        if (j.contains("bias")) s.bias = j.at("bias").get<int>();
        const std::string fin = j.value("finite_convention", "all-finite");
        if (fin == "all-finite") s.finite = FiniteConvention::AllFinite;
        else if (fin == "extended-finite") s.finite = FiniteConvention::ExtendedFinite;
        else fail(errc::parse_error, "unknown finite_convention '" + fin + "'");
        s.subnormals = j.value("subnormals", true);
        s.int_max = j.value("int_max", std::int64_t{0});
    } catch (const nlohmann::json::exception& e) {
        fail(errc::parse_error, std::string("bad format JSON: ") + e.what());
    }
    s.validate();
    return s;
}

std::string FloatFormatSpec::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    switch (kind) {
    case FormatKind::Minifloat: j["kind"] = "minifloat"; break;
    case FormatKind::IntegerSymmetric: j["kind"] = "integer-symmetric"; break;
    case FormatKind::Exact: j["kind"] = "exact"; break;
    }
    if (kind == FormatKind::Minifloat) {
        j["exponent_bits"] = exponent_bits;
        j["mantissa_bits"] = mantissa_bits;
        j["signed"] = is_signed;
        j["bias"] = effective_bias();
        j["finite_convention"] =
            finite == FiniteConvention::AllFinite ? "all-finite" : "extended-finite";
        j["subnormals"] = subnormals;
    }
    if (kind == FormatKind::IntegerSymmetric) j["int_max"] = int_max;
    return j.dump();
}

} // namespace mxmse
