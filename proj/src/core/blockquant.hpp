#ifndef MXMSE_CORE_BLOCKQUANT_HPP
#define MXMSE_CORE_BLOCKQUANT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "formats.hpp"

namespace mxmse {

/// A full microscaling scheme: element format, scale format (or exact),
/// block size, optional per-tensor scaling.
struct QuantConfig {
    LevelTable element;
    std::optional<LevelTable> scale; // nullopt = exact (non-quantized) scales
    std::int64_t block_size = 32;
    bool per_tensor_scaling = false;
    double scale_divisor = 0.0; // C in s = Q(x_max / C); defaults to element max
    std::string name;

    QuantConfig() = default;
    QuantConfig(LevelTable elem, std::optional<LevelTable> scale_table, std::int64_t n,
                bool per_tensor = false, double divisor = 0.0);

    bool exact_scales() const { return !scale.has_value(); }
};

/// Packed result of quantizing a tensor under a QuantConfig.
struct QuantizedTensor {
    std::vector<std::uint32_t> codes;       // one element code per input value
    std::vector<double> scales;             // per-block scale values s^(j)
    std::vector<std::uint32_t> scale_codes; // empty when scales are exact
    double tensor_scale = 1.0;              // s_T; 1 when per-tensor scaling off
    std::int64_t length = 0;
    std::int64_t block_size = 0;
    std::string element_format;
    std::string scale_format; // "exact" when not quantized

    std::int64_t block_count() const;
    std::int64_t trailing_block_length() const;
};

/// Scale of one block: round_to_level(max|x| / C), or the unrounded ratio
/// under exact scales. An all-zero block yields scale 0 whenever 0 is
/// representable (it is, for every unsigned minifloat scale format).
double derive_scale(std::span<const double> block, const QuantConfig& cfg);

/// Per-tensor scaling factor stretching t to the combined dynamic range of
/// element and scale formats. All-zero tensors get s_T = 1.
double per_tensor_scale(std::span<const double> t, const QuantConfig& cfg);

QuantizedTensor quantize_tensor(std::span<const double> x, const QuantConfig& cfg);
std::vector<double> dequantize_tensor(const QuantizedTensor& q, const QuantConfig& cfg);

/// Convenience: dequantize(quantize(x)).
std::vector<double> roundtrip_tensor(std::span<const double> x, const QuantConfig& cfg);

/// element_bits/8 + scale_bits/(8N) bytes per element.
double storage_bytes_per_element(std::int64_t block_size, int element_bits, int scale_bits);
/// Relative storage increase caused by halving the block size from N.
double storage_halving_increase(std::int64_t block_size, int element_bits, int scale_bits);

/// Binary serialization: little-endian header + bit-packed element codes +
/// scale codes (see README for the exact layout).
void save_quantized(const QuantizedTensor& q, const std::string& path);
QuantizedTensor load_quantized(const std::string& path);
std::string quantized_debug_json(const QuantizedTensor& q);

} // namespace mxmse

#endif
