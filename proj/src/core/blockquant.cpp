#include "blockquant.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace mxmse {

QuantConfig::QuantConfig(LevelTable elem, std::optional<LevelTable> scale_table, std::int64_t n,
                         bool per_tensor, double divisor)
    : element(std::move(elem)),
      scale(std::move(scale_table)),
      block_size(n),
      per_tensor_scaling(per_tensor),
      scale_divisor(divisor) {
    require(block_size >= 1, errc::invalid_argument, "block size must be >= 1");
    if (scale_divisor == 0.0) scale_divisor = element.max_value;
    require(scale_divisor > 0.0, errc::invalid_argument, "scale divisor must be positive");
    name = element.name + ":" + (scale ? scale->name : std::string("exact")) + ":bs" +
           std::to_string(block_size);
    if (per_tensor_scaling) name += ":pt";
}

std::int64_t QuantizedTensor::block_count() const {
    return (length + block_size - 1) / block_size;
}

std::int64_t QuantizedTensor::trailing_block_length() const {
    const std::int64_t rem = length % block_size;
    return rem == 0 ? block_size : rem;
}

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace

double derive_scale(std::span<const double> block, const QuantConfig& cfg) {
    require(!block.empty(), errc::invalid_argument, "empty block");
    const double raw = max_abs(block) / cfg.scale_divisor;
    if (cfg.exact_scales()) return raw;
    return cfg.scale->round(raw);
}

double per_tensor_scale(std::span<const double> t, const QuantConfig& cfg) {
    const double m = max_abs(t);
    if (m == 0.0) return 1.0;
    // Under exact scales the scale range is unbounded; only the element
    // range is stretched.
    const double scale_max = cfg.exact_scales() ? 1.0 : cfg.scale->max_value;
    return cfg.element.max_value * scale_max / m;
}

QuantizedTensor quantize_tensor(std::span<const double> x, const QuantConfig& cfg) {
    QuantizedTensor q;
    q.length = static_cast<std::int64_t>(x.size());
    q.block_size = cfg.block_size;
    q.element_format = cfg.element.name;
    q.scale_format = cfg.exact_scales() ? "exact" : cfg.scale->name;
    q.tensor_scale = cfg.per_tensor_scaling ? per_tensor_scale(x, cfg) : 1.0;

    const std::int64_t n = q.length;
    const std::int64_t n_blocks = q.block_count();
    q.codes.resize(static_cast<std::size_t>(n));
    q.scales.reserve(static_cast<std::size_t>(n_blocks));
    if (!cfg.exact_scales()) q.scale_codes.reserve(static_cast<std::size_t>(n_blocks));

    const LevelTable& elem = cfg.element;
    const std::size_t zero_code_idx = elem.has_zero() ? elem.zero_index() : elem.round_index(0.0);

    std::vector<double> scratch;
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        const std::int64_t lo = b * cfg.block_size;
        const std::int64_t hi = std::min(n, lo + cfg.block_size);
        scratch.clear();
        for (std::int64_t i = lo; i < hi; ++i)
            scratch.push_back(x[static_cast<std::size_t>(i)] * q.tensor_scale);
        const double s = derive_scale(scratch, cfg);
        q.scales.push_back(s);
        if (!cfg.exact_scales()) q.scale_codes.push_back(cfg.scale->code_of_level(s));
        for (std::int64_t i = lo; i < hi; ++i) {
            const double xi = scratch[static_cast<std::size_t>(i - lo)];
            const std::size_t idx = (s == 0.0) ? zero_code_idx : elem.round_index(xi / s);
            q.codes[static_cast<std::size_t>(i)] = elem.codes[idx];
        }
    }
    return q;
}

std::vector<double> dequantize_tensor(const QuantizedTensor& q, const QuantConfig& cfg) {
    require(q.block_size == cfg.block_size, errc::mismatch, "block size mismatch");
    require(q.element_format == cfg.element.name, errc::mismatch, "element format mismatch");
    require(q.scale_format == (cfg.exact_scales() ? "exact" : cfg.scale->name), errc::mismatch,
            "scale format mismatch");
    require(static_cast<std::int64_t>(q.scales.size()) == q.block_count(), errc::mismatch,
            "scale entry count does not match block count");
    require(static_cast<std::int64_t>(q.codes.size()) == q.length, errc::mismatch,
            "code count does not match tensor length");

    std::vector<double> out(static_cast<std::size_t>(q.length));
    for (std::int64_t b = 0; b < q.block_count(); ++b) {
        const std::int64_t lo = b * q.block_size;
        const std::int64_t hi = std::min(q.length, lo + q.block_size);
        const double s = q.scales[static_cast<std::size_t>(b)];
        for (std::int64_t i = lo; i < hi; ++i) {
            const double level = cfg.element.level_of_code(q.codes[static_cast<std::size_t>(i)]);
            out[static_cast<std::size_t>(i)] = s * level / q.tensor_scale;
        }
    }
    return out;
}

std::vector<double> roundtrip_tensor(std::span<const double> x, const QuantConfig& cfg) {
    return dequantize_tensor(quantize_tensor(x, cfg), cfg);
}

double storage_bytes_per_element(std::int64_t block_size, int element_bits, int scale_bits) {
    require(block_size >= 1, errc::invalid_argument, "block size must be >= 1");
    return element_bits / 8.0 + scale_bits / (8.0 * static_cast<double>(block_size));
}

double storage_halving_increase(std::int64_t block_size, int element_bits, int scale_bits) {
    require(block_size >= 1, errc::invalid_argument, "block size must be >= 1");
    return static_cast<double>(scale_bits) /
           (static_cast<double>(element_bits) * static_cast<double>(block_size) + scale_bits);
}

namespace {

constexpr char kMagic[8] = {'M', 'X', 'Q', 'T', '0', '0', '0', '1'};

template <typename T>
void write_le(std::string& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) fail(errc::truncated, "quantized tensor file truncated");
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

void write_string(std::string& out, const std::string& s) {
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
    out.append(s);
}

std::string read_string(const std::string& in, std::size_t& pos) {
    const auto len = read_le<std::uint16_t>(in, pos);
    if (pos + len > in.size()) fail(errc::truncated, "quantized tensor file truncated");
    std::string s = in.substr(pos, len);
    pos += len;
    return s;
}

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        require(f.good(), errc::io_error, "cannot open '" + tmp + "' for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        require(f.good(), errc::io_error, "write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    require(!ec, errc::io_error, "rename to '" + path + "' failed: " + ec.message());
}

} // namespace

void save_quantized(const QuantizedTensor& q, const std::string& path) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    write_le<std::int64_t>(out, q.block_size);
    write_le<std::int64_t>(out, q.length);
    write_string(out, q.element_format);
    write_string(out, q.scale_format);
    write_le<double>(out, q.tensor_scale);

    // element codes, bit-packed LSB-first at the element bit width
    int elem_bits = 0;
    for (std::uint32_t c : q.codes)
        while (c >> elem_bits) ++elem_bits;
    elem_bits = std::max(elem_bits, 1);
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(elem_bits));
    {
        std::uint64_t acc = 0;
        int filled = 0;
        for (std::uint32_t c : q.codes) {
            acc |= static_cast<std::uint64_t>(c) << filled;
            filled += elem_bits;
            while (filled >= 8) {
                out.push_back(static_cast<char>(acc & 0xFF));
                acc >>= 8;
                filled -= 8;
            }
        }
        if (filled > 0) out.push_back(static_cast<char>(acc & 0xFF));
    }

    if (q.scale_format == "exact") {
        for (double s : q.scales) write_le<double>(out, s);
    } else {
        for (std::uint32_t c : q.scale_codes)
            write_le<std::uint8_t>(out, static_cast<std::uint8_t>(c));
    }
    atomic_write(path, out);
}

QuantizedTensor load_quantized(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), errc::io_error, "cannot open '" + path + "'");
    std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0)
        fail(errc::parse_error, "bad quantized tensor magic");
    pos += sizeof(kMagic);

    QuantizedTensor q;
    q.block_size = read_le<std::int64_t>(in, pos);
    q.length = read_le<std::int64_t>(in, pos);
    require(q.block_size >= 1 && q.length >= 0, errc::parse_error, "bad quantized tensor header");
    q.element_format = read_string(in, pos);
    q.scale_format = read_string(in, pos);
    q.tensor_scale = read_le<double>(in, pos);

    const int elem_bits = read_le<std::uint8_t>(in, pos);
    require(elem_bits >= 1 && elem_bits <= 32, errc::parse_error, "bad element code width");
    const std::size_t packed =
        (static_cast<std::size_t>(q.length) * static_cast<std::size_t>(elem_bits) + 7) / 8;
    if (pos + packed > in.size()) fail(errc::truncated, "quantized tensor file truncated");
    q.codes.resize(static_cast<std::size_t>(q.length));
    {
        std::uint64_t acc = 0;
        int filled = 0;
        std::size_t byte = pos;
        for (auto& c : q.codes) {
            while (filled < elem_bits) {
                acc |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[byte++])) << filled;
                filled += 8;
            }
            c = static_cast<std::uint32_t>(acc & ((1u << elem_bits) - 1u));
            acc >>= elem_bits;
            filled -= elem_bits;
        }
    }
    pos += packed;

    const std::int64_t n_blocks = q.block_count();
    q.scales.resize(static_cast<std::size_t>(n_blocks));
    if (q.scale_format == "exact") {
        for (auto& s : q.scales) s = read_le<double>(in, pos);
    } else {
        const LevelTable table = registry_table(q.scale_format);
        q.scale_codes.resize(static_cast<std::size_t>(n_blocks));
        for (std::size_t b = 0; b < q.scale_codes.size(); ++b) {
            q.scale_codes[b] = read_le<std::uint8_t>(in, pos);
            q.scales[b] = table.level_of_code(q.scale_codes[b]);
        }
    }
    return q;
}

std::string quantized_debug_json(const QuantizedTensor& q) {
    nlohmann::json j;
    j["schema"] = "mxmse.qtensor.v1";
    j["block_size"] = q.block_size;
    j["length"] = q.length;
    j["element_format"] = q.element_format;
    j["scale_format"] = q.scale_format;
    j["tensor_scale"] = q.tensor_scale;
    j["scales"] = q.scales;
    j["codes"] = q.codes;
    if (!q.scale_codes.empty()) j["scale_codes"] = q.scale_codes;
    return j.dump(2);
}

} // namespace mxmse
