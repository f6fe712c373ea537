#include "lfk/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "lfk/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "slab writer assumes a little-endian host");

namespace lfk {

using nlohmann::json;

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string hash_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("output: cannot open " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ConfigError("output: short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw ConfigError("output: cannot rename " + tmp + " to " + path);
    }
}

namespace {

void preamble(std::ostringstream& os, const RunConfig& cfg,
              const std::string& method) {
    os << "# config=" << cfg.canonical_json() << "\n";
    os << "# config_hash=" << hash_hex(cfg.config_hash()) << "\n";
    os << "# method=" << method << "\n";
}

json json_meta(const RunConfig& cfg, const std::string& method) {
    json j;
    j["config"] = json::parse(cfg.canonical_json());
    j["config_hash"] = hash_hex(cfg.config_hash());
    j["method"] = method;
    return j;
}

} // namespace

std::string render_fk_csv(const RunConfig& cfg, const std::vector<FkRow>& rows) {
    std::ostringstream os;
    preamble(os, cfg, "fk");
    os << "model_hash,t,p,hbar,mean,stderr,n_paths,dt,seed\n";
    const std::string mh = hash_hex(cfg.model_hash());
    const double hbar = cfg.problem.model.hbar.value_or(1.0);
    for (const auto& r : rows) {
        os << mh << ',' << format_g17(r.t) << ',' << format_g17(r.p) << ','
           << format_g17(hbar) << ',' << format_g17(r.mean) << ','
           << format_g17(r.stderr_) << ',' << r.n_paths << ','
           << format_g17(r.dt) << ',' << r.seed << "\n";
    }
    return os.str();
}

std::string render_fk_json(const RunConfig& cfg, const std::vector<FkRow>& rows) {
    json j = json_meta(cfg, "fk");
    j["model_hash"] = hash_hex(cfg.model_hash());
    const double hbar = cfg.problem.model.hbar.value_or(1.0);
    json arr = json::array();
    for (const auto& r : rows) {
        json e;
        e["t"] = r.t;
        e["p"] = r.p;
        e["hbar"] = hbar;
        e["mean"] = r.mean;
        e["stderr"] = r.stderr_;
        e["n_paths"] = r.n_paths;
        e["dt"] = r.dt;
        e["seed"] = r.seed;
        arr.push_back(e);
    }
    j["rows"] = arr;
    return j.dump(2) + "\n";
}

std::string render_grid_csv(const RunConfig& cfg, const GridSolution& sol) {
    std::ostringstream os;
    preamble(os, cfg, "pide");
    os << "# hbar=" << format_g17(sol.hbar) << "\n";
    os << "# positive=" << (sol.positive ? 1 : 0) << "\n";
    os << "# boundary_truncated=" << (sol.boundary_truncated ? 1 : 0) << "\n";
    os << "t,p,u\n";
    for (size_t i = 0; i < sol.t.size(); ++i) {
        const std::string ts = format_g17(sol.t[i]);
        for (size_t k = 0; k < sol.x.size(); ++k) {
            os << ts << ',' << format_g17(sol.x[k]) << ','
               << format_g17(sol.at(i, k)) << "\n";
        }
    }
    return os.str();
}

std::string render_grid_json(const RunConfig& cfg, const GridSolution& sol) {
    json j = json_meta(cfg, "pide");
    j["hbar"] = sol.hbar;
    j["positive"] = sol.positive;
    j["boundary_truncated"] = sol.boundary_truncated;
    j["t"] = sol.t;
    j["x"] = sol.x;
    json u = json::array();
    for (size_t i = 0; i < sol.t.size(); ++i)
        u.push_back(std::vector<double>(sol.u.begin() + static_cast<long>(i * sol.x.size()),
                                        sol.u.begin() + static_cast<long>((i + 1) * sol.x.size())));
    j["u"] = u;
    return j.dump(2) + "\n";
}

std::vector<double> bordered_matrix(const GridSolution& sol,
                                    uint64_t* rows, uint64_t* cols) {
    const uint64_t nr = sol.t.size() + 1;
    const uint64_t nc = sol.x.size() + 1;
    std::vector<double> m(nr * nc, 0.0);
    for (size_t k = 0; k < sol.x.size(); ++k) m[1 + k] = sol.x[k];
    for (size_t i = 0; i < sol.t.size(); ++i) {
        m[(i + 1) * nc] = sol.t[i];
        std::memcpy(&m[(i + 1) * nc + 1], &sol.u[i * sol.x.size()],
                    sol.x.size() * sizeof(double));
    }
    *rows = nr;
    *cols = nc;
    return m;
}

std::string render_slab(uint64_t rows, uint64_t cols,
                        const std::vector<double>& data) {
    if (data.size() != rows * cols)
        throw SolverError("slab: data size does not match rows*cols");
    std::string out;
    out.reserve(4 + 4 + 16 + data.size() * 8);
    out.append("LFK1", 4);
    const uint32_t version = 1;
    out.append(reinterpret_cast<const char*>(&version), 4);
    out.append(reinterpret_cast<const char*>(&rows), 8);
    out.append(reinterpret_cast<const char*>(&cols), 8);
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * 8);
    return out;
}

Slab parse_slab(const std::string& bytes) {
    if (bytes.size() < 24 || bytes.compare(0, 4, "LFK1") != 0)
        throw ConfigError("slab: bad magic");
    uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    if (version != 1) throw ConfigError("slab: unsupported version");
    Slab s;
    std::memcpy(&s.rows, bytes.data() + 8, 8);
    std::memcpy(&s.cols, bytes.data() + 16, 8);
    const uint64_t want = 24 + s.rows * s.cols * 8;
    if (bytes.size() != want) throw ConfigError("slab: truncated payload");
    s.data.resize(s.rows * s.cols);
    std::memcpy(s.data.data(), bytes.data() + 24, s.rows * s.cols * 8);
    return s;
}

std::string render_table_csv(const RunConfig& cfg, const Table& table) {
    std::ostringstream os;
    preamble(os, cfg, table.method);
    for (const auto& [k, v] : table.notes) os << "# " << k << "=" << v << "\n";
    for (size_t i = 0; i < table.header.size(); ++i)
        os << (i ? "," : "") << table.header[i];
    os << "\n";
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_g17(row[i]);
        os << "\n";
    }
    return os.str();
}

std::string render_table_json(const RunConfig& cfg, const Table& table) {
    json j = json_meta(cfg, table.method);
    for (const auto& [k, v] : table.notes) j[k] = v;
    j["header"] = table.header;
    j["rows"] = table.rows;
    return j.dump(2) + "\n";
}

namespace {

struct Artifact {
    std::string method;
    std::string header;
    std::vector<std::string> rows;
};

Artifact read_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("report: cannot open " + path);
    Artifact a;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# method=";
            if (line.compare(0, tag.size(), tag) == 0)
                a.method = line.substr(tag.size());
            continue;
        }
        if (!header_seen) {
            a.header = line;
            header_seen = true;
        } else {
            a.rows.push_back(line);
        }
    }
    if (a.method.empty())
        throw ConfigError("report: " + path + " has no method tag");
    if (!header_seen)
        throw ConfigError("report: " + path + " has no header row");
    return a;
}

struct Section {
    std::string header;
    size_t sources = 0;
    std::vector<std::string> rows;
};

std::vector<std::pair<std::string, Section>> collect(
    const std::vector<std::string>& paths) {
    std::vector<std::pair<std::string, Section>> sections;
    for (const auto& path : paths) {
        Artifact a = read_artifact(path);
        auto it = sections.begin();
        for (; it != sections.end(); ++it)
            if (it->first == a.method) break;
        if (it == sections.end()) {
            sections.push_back({a.method, Section{a.header, 0, {}}});
            it = sections.end() - 1;
        } else if (it->second.header != a.header) {
            throw ConfigError("report: mixed schemas for method " + a.method +
                              " (" + path + ")");
        }
        it->second.sources += 1;
        for (auto& r : a.rows) it->second.rows.push_back(std::move(r));
    }
    return sections;
}

} // namespace

std::string merge_reports_csv(const std::vector<std::string>& paths) {
    auto sections = collect(paths);
    std::ostringstream os;
    os << "# report sections=" << sections.size() << "\n";
    for (const auto& [method, sec] : sections) {
        os << "# section=" << method << "\n";
        os << "# sources=" << sec.sources << "\n";
        os << sec.header << "\n";
        for (const auto& r : sec.rows) os << r << "\n";
    }
    return os.str();
}

std::string merge_reports_json(const std::vector<std::string>& paths) {
    auto sections = collect(paths);
    json j;
    json arr = json::array();
    for (const auto& [method, sec] : sections) {
        json s;
        s["method"] = method;
        s["sources"] = sec.sources;
        s["header"] = sec.header;
        s["rows"] = sec.rows;
        arr.push_back(s);
    }
    j["sections"] = arr;
    return j.dump(2) + "\n";
}

} // namespace lfk
