#ifndef MXMSE_CORE_FORMATS_HPP
#define MXMSE_CORE_FORMATS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mxmse {

enum class FormatKind { Minifloat, IntegerSymmetric, Exact };

// Which codes of a minifloat are numbers.
//   ExtendedFinite: only the all-ones exponent+mantissa code is non-numeric
//                   (E4M3 style), everything else is finite.
//   AllFinite:      every code is a number.
enum class FiniteConvention { ExtendedFinite, AllFinite };

enum class Rounding { NearestEvenCode, NearestTiesAway };

/// Declarative description of a (possibly unsigned) minifloat or
/// symmetric-integer code space.
struct FloatFormatSpec {
    std::string name;
    FormatKind kind = FormatKind::Minifloat;
    int exponent_bits = 0;
    int mantissa_bits = 0; // explicit bits, excluding the implied leading 1
    bool is_signed = false;
    std::optional<int> bias; // defaults to 2^(exponent_bits-1) - 1
    FiniteConvention finite = FiniteConvention::AllFinite;
    bool subnormals = true;
    std::int64_t int_max = 0; // IntegerSymmetric only

    int effective_bias() const;
    int bit_width() const;
    void validate() const;

    static FloatFormatSpec from_json(const std::string& text);
    std::string to_json() const;
};

/// Sorted representable values of a format together with round-to-nearest
/// decision boundaries. Immutable after construction.
struct LevelTable {
    std::string name;
    std::vector<double> levels;          // strictly increasing
    std::vector<std::uint32_t> codes;    // canonical code of each level
    std::vector<double> boundaries;      // midpoints, size() - 1 entries
    double max_value = 0.0;              // largest |level|
    double min_positive = 0.0;           // smallest positive level (0 if none)
    Rounding rounding = Rounding::NearestEvenCode;
    int bits = 0;

    std::size_t size() const { return levels.size(); }
    bool has_zero() const { return zero_index_ >= 0; }
    std::size_t zero_index() const;

    /// Index of the level x rounds to (saturating, ties per `rounding`).
    std::size_t round_index(double x) const;
    /// Nearest level; values beyond +-max_value saturate.
    double round(double x) const { return levels[round_index(x)]; }

    std::uint32_t code_of_level(double level) const; // errors on non-level input
    double level_of_code(std::uint32_t code) const;  // errors on unknown code

    friend LevelTable enumerate_levels(const FloatFormatSpec& spec);

private:
    std::int64_t zero_index_ = -1;
};

/// Complete, deduplicated, sorted level set of all codes of `spec`.
LevelTable enumerate_levels(const FloatFormatSpec& spec);

/// Built-in formats addressable by name ("e2m1", "ue4m3", "ue5m3", "ue4m4",
/// "ue5m1", "ue4m2", "e8m0", "bf16", "e4m3", "int4", "exact").
const std::vector<std::string>& registry_names();
bool registry_has(const std::string& name);
FloatFormatSpec registry_spec(const std::string& name);
LevelTable registry_table(const std::string& name);

} // namespace mxmse

#endif
