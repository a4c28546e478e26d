#include "curve.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "errors.hpp"

namespace mxmse {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_text(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        require(f.good(), errc::io_error, "cannot open '" + tmp + "' for writing");
        f << text;
        require(f.good(), errc::io_error, "write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    require(!ec, errc::io_error, "rename to '" + path + "' failed: " + ec.message());
}

const char* source_name(CurveSource s) {
    return s == CurveSource::Theory ? "theory" : "monte-carlo";
}

} // namespace

void MseCurve::write_csv(const std::string& path) const {
    std::string out;
    out += "# schema=mxmse.curve.v1\n";
    out += "# source=";
    out += source_name(source);
    out += " config=" + config_name + "\n";
    out += "sigma,mse,mse_not_max,mse_is_max,mse_zero_scale,n,seed\n";
    for (const auto& p : points) {
        out += fmt_double(p.sigma) + "," + fmt_double(p.mse) + "," + fmt_double(p.not_max) + "," +
               fmt_double(p.is_max) + "," + fmt_double(p.zero_scale) + "," +
               std::to_string(n_per_point) + "," + std::to_string(seed) + "\n";
    }
    atomic_write_text(path, out);
}

void MseCurve::write_json(const std::string& path) const {
    nlohmann::json j;
    j["schema"] = "mxmse.curve.v1";
    j["source"] = source_name(source);
    j["config"] = config_name;
    j["seed"] = seed;
    j["n_per_point"] = n_per_point;
    auto& pts = j["points"] = nlohmann::json::array();
    for (const auto& p : points) {
        pts.push_back({{"sigma", p.sigma},
                       {"mse", p.mse},
                       {"mse_not_max", p.not_max},
                       {"mse_is_max", p.is_max},
                       {"mse_zero_scale", p.zero_scale}});
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

} // namespace mxmse
