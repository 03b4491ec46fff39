#pragma once

#include <hslag/geometry.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace hslag {

// Parse failures carry the file and line they anchor to.
struct ParseError : std::runtime_error {
    ParseError(const std::string& path, int line, const std::string& msg)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + msg) {}
};

namespace ioutil {

// 17 significant digits: doubles survive the text round trip to the last ulp.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string checksum_line(const std::string& payload) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a(payload));
    return std::string("checksum = fnv1a:") + buf;
}

// Temp-file-plus-rename so readers never observe partial content.
inline void write_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        size_t end = s.find('\n', start);
        if (end == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

inline bool to_double(const std::string& s, double& out) {
    const char* c = s.c_str();
    char* end = nullptr;
    out = std::strtod(c, &end);
    if (end == c) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

inline bool to_int(const std::string& s, int& out) {
    const char* c = s.c_str();
    char* end = nullptr;
    long v = std::strtol(c, &end, 10);
    if (end == c) return false;
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != '\0') return false;
    out = int(v);
    return true;
}

}  // namespace ioutil

// ---------------------------------------------------------------------------
// Potential files: sections [case], [grid], [loop] and repeated [coefficient]
// blocks with k and polynomial matrix entries "row, col, (degree, re, im)...".
// ---------------------------------------------------------------------------

struct PotentialFile {
    HoloPotential potential;
    GridSpec grid;
    LoopSpec loop;
};

inline PotentialFile read_potential(const std::string& path) {
    using ioutil::to_double;
    using ioutil::to_int;
    auto lines = ioutil::split_lines(ioutil::read_file(path));

    struct Term {
        int degree;
        double re, im;
    };
    struct Entry {
        int line, row, col;
        std::vector<Term> terms;
    };
    struct Block {
        int line;
        bool k_set = false;
        int k = 0;
        std::vector<Entry> entries;
    };

    enum class Sec { none, case_, grid, loop, coeff };
    Sec sec = Sec::none;
    std::string case_name = "CP2";
    GridSpec grid;
    LoopSpec loop;
    std::vector<Block> blocks;

    auto parse_entry = [&](const std::string& v, int line) {
        Entry e{line, 0, 0, {}};
        size_t pos = 0;
        auto ws = [&] {
            while (pos < v.size() && std::isspace((unsigned char)v[pos])) ++pos;
        };
        auto number = [&]() {
            ws();
            const char* start = v.c_str() + pos;
            char* end = nullptr;
            double out = std::strtod(start, &end);
            if (end == start) throw ParseError(path, line, "expected a number in entry");
            pos += size_t(end - start);
            return out;
        };
        auto integer = [&]() {
            double d = number();
            if (d != std::floor(d)) throw ParseError(path, line, "expected an integer in entry");
            return int(d);
        };
        auto expect = [&](char c) {
            ws();
            if (pos >= v.size() || v[pos] != c)
                throw ParseError(path, line, std::string("expected '") + c + "' in entry");
            ++pos;
        };
        e.row = integer();
        expect(',');
        e.col = integer();
        while (true) {
            ws();
            if (pos >= v.size()) break;
            expect(',');
            expect('(');
            Term t{};
            t.degree = integer();
            expect(',');
            t.re = number();
            expect(',');
            t.im = number();
            expect(')');
            e.terms.push_back(t);
        }
        if (e.terms.empty())
            throw ParseError(path, line, "entry needs at least one (degree, re, im) term");
        return e;
    };

    for (int i = 1; i <= int(lines.size()); ++i) {
        std::string s = ioutil::trim(lines[i - 1]);
        if (s.empty() || s[0] == '#') continue;
        if (s[0] == '[') {
            if (s == "[case]")
                sec = Sec::case_;
            else if (s == "[grid]")
                sec = Sec::grid;
            else if (s == "[loop]")
                sec = Sec::loop;
            else if (s == "[coefficient]") {
                sec = Sec::coeff;
                blocks.push_back(Block{i});
            } else
                throw ParseError(path, i, "unknown section " + s);
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(path, i, "expected key = value");
        std::string key = ioutil::trim(s.substr(0, eq));
        std::string val = ioutil::trim(s.substr(eq + 1));
        switch (sec) {
            case Sec::none:
                throw ParseError(path, i, "content before any section header");
            case Sec::case_:
                if (key == "label") {
                    try {
                        case_by_label(val);
                    } catch (const std::exception&) {
                        throw ParseError(path, i, "unknown case label '" + val + "'");
                    }
                    case_name = val;
                } else
                    throw ParseError(path, i, "unknown key '" + key + "' in [case]");
                break;
            case Sec::grid: {
                bool ok = true;
                if (key == "x0")
                    ok = to_double(val, grid.x0);
                else if (key == "y0")
                    ok = to_double(val, grid.y0);
                else if (key == "x1")
                    ok = to_double(val, grid.x1);
                else if (key == "y1")
                    ok = to_double(val, grid.y1);
                else if (key == "nx")
                    ok = to_int(val, grid.nx);
                else if (key == "ny")
                    ok = to_int(val, grid.ny);
                else
                    throw ParseError(path, i, "unknown key '" + key + "' in [grid]");
                if (!ok) throw ParseError(path, i, "malformed value for '" + key + "'");
                break;
            }
            case Sec::loop: {
                bool ok = true;
                if (key == "samples")
                    ok = to_int(val, loop.N);
                else if (key == "cap")
                    ok = to_int(val, loop.K);
                else
                    throw ParseError(path, i, "unknown key '" + key + "' in [loop]");
                if (!ok) throw ParseError(path, i, "malformed value for '" + key + "'");
                break;
            }
            case Sec::coeff:
                if (key == "k") {
                    Block& b = blocks.back();
                    if (b.k_set) throw ParseError(path, i, "duplicate k in coefficient block");
                    if (!to_int(val, b.k)) throw ParseError(path, i, "malformed value for 'k'");
                    if (b.k < -2)
                        throw ParseError(path, i,
                                         "mode k = " + val + " below the allowed support k >= -2");
                    b.k_set = true;
                } else if (key == "entry") {
                    if (!blocks.back().k_set)
                        throw ParseError(path, i, "entry before k in coefficient block");
                    blocks.back().entries.push_back(parse_entry(val, i));
                } else
                    throw ParseError(path, i, "unknown key '" + key + "' in [coefficient]");
                break;
        }
    }

    CaseData cs = case_by_label(case_name);
    HoloPotential pot{cs, {}};
    for (const auto& b : blocks) {
        if (!b.k_set) throw ParseError(path, b.line, "coefficient block missing k");
        if (pot.modes.count(b.k))
            throw ParseError(path, b.line,
                             "duplicate coefficient block for k = " + std::to_string(b.k));
        int maxd = 0;
        for (const auto& e : b.entries) {
            if (e.row < 0 || e.row >= cs.n || e.col < 0 || e.col >= cs.n)
                throw ParseError(path, e.line, "entry index outside the matrix");
            for (const auto& t : e.terms) {
                if (t.degree < 0) throw ParseError(path, e.line, "negative polynomial degree");
                maxd = std::max(maxd, t.degree);
            }
        }
        std::vector<Mat> co(size_t(maxd) + 1, Mat::Zero(cs.n, cs.n));
        std::set<std::tuple<int, int, int>> used;
        for (const auto& e : b.entries)
            for (const auto& t : e.terms) {
                if (!used.insert({e.row, e.col, t.degree}).second)
                    throw ParseError(path, e.line, "duplicate term for this entry and degree");
                co[t.degree](e.row, e.col) = cxd(t.re, t.im);
            }
        int band = ((b.k % 4) + 4) % 4;
        for (size_t d = 0; d < co.size(); ++d)
            if (frob((co[d] - project_eigenspace(cs, co[d], band)).eval()) > 1e-10)
                throw ParseError(path, b.line,
                                 "coefficient k = " + std::to_string(b.k) + ", degree " +
                                     std::to_string(d) + " violates the twist grading");
        pot.modes[b.k] = std::move(co);
    }
    validate(grid);
    validate_potential(pot);
    return {std::move(pot), grid, loop};
}

inline void write_potential(const std::string& path, const PotentialFile& pf) {
    using ioutil::fmt;
    std::ostringstream out;
    out << "# hslag potential\n\n[case]\nlabel = " << case_label(pf.potential.cs.name) << "\n\n";
    out << "[grid]\n";
    out << "x0 = " << fmt(pf.grid.x0) << "\ny0 = " << fmt(pf.grid.y0) << "\n";
    out << "x1 = " << fmt(pf.grid.x1) << "\ny1 = " << fmt(pf.grid.y1) << "\n";
    out << "nx = " << pf.grid.nx << "\nny = " << pf.grid.ny << "\n\n";
    out << "[loop]\nsamples = " << pf.loop.N << "\ncap = " << pf.loop.K << "\n";
    for (const auto& [k, co] : pf.potential.modes) {
        out << "\n[coefficient]\nk = " << k << "\n";
        int n = pf.potential.cs.n;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                std::string terms;
                for (size_t d = 0; d < co.size(); ++d) {
                    cxd v = co[d](r, c);
                    if (v == cxd(0, 0)) continue;
                    terms += ", (" + std::to_string(d) + ", " + fmt(v.real()) + ", " +
                             fmt(v.imag()) + ")";
                }
                if (!terms.empty())
                    out << "entry = " << r << ", " << c << terms << "\n";
            }
    }
    ioutil::write_atomic(path, out.str());
}

// ---------------------------------------------------------------------------
// Frame archives: header, per-node sample blocks, content checksum. Values
// round trip to the last ulp.
// ---------------------------------------------------------------------------

struct FrameArchive {
    std::string case_name = "CP2";
    GridSpec grid;
    int N = 0;
    int K = 0;
    std::vector<TwistedGroupLoop> loops;
};

inline void write_archive(const std::string& path, const FrameArchive& ar) {
    using ioutil::fmt;
    int n = case_by_label(ar.case_name).n;
    std::ostringstream out;
    out << "hslag-frame-archive\nversion = 1.0\ncase = " << ar.case_name << "\n";
    out << "x0 = " << fmt(ar.grid.x0) << "\ny0 = " << fmt(ar.grid.y0) << "\n";
    out << "x1 = " << fmt(ar.grid.x1) << "\ny1 = " << fmt(ar.grid.y1) << "\n";
    out << "nx = " << ar.grid.nx << "\nny = " << ar.grid.ny << "\n";
    out << "N = " << ar.N << "\nK = " << ar.K << "\n";
    out << "count = " << ar.loops.size() << "\n";
    for (size_t i = 0; i < ar.loops.size(); ++i) {
        out << "loop " << i << "\n";
        const auto& lp = ar.loops[i];
        for (int j = 0; j < int(lp.samples.size()); ++j) {
            out << "sample " << j << "\n";
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) {
                    if (c) out << " ";
                    out << fmt(lp.samples[j](r, c).real()) << " " << fmt(lp.samples[j](r, c).imag());
                }
                out << "\n";
            }
        }
    }
    std::string payload = out.str();
    ioutil::write_atomic(path, payload + ioutil::checksum_line(payload) + "\n");
}

inline FrameArchive read_archive(const std::string& path) {
    std::string content = ioutil::read_file(path);
    size_t cpos = content.rfind("checksum = ");
    if (cpos == std::string::npos)
        throw std::runtime_error(path + ": missing checksum line");
    std::string payload = content.substr(0, cpos);
    auto lines = ioutil::split_lines(payload);
    int li = 0;
    auto next = [&]() -> std::string {
        while (li < int(lines.size())) {
            std::string s = ioutil::trim(lines[li++]);
            if (!s.empty()) return s;
        }
        throw ParseError(path, li, "unexpected end of archive");
    };
    auto keyval = [&](const std::string& key) {
        std::string s = next();
        std::string prefix = key + " = ";
        if (s.rfind(prefix, 0) != 0)
            throw ParseError(path, li, "expected '" + key + " = ...'");
        return s.substr(prefix.size());
    };
    if (next() != "hslag-frame-archive")
        throw ParseError(path, li, "not a frame archive");
    std::string ver = keyval("version");
    if (ver.rfind("1.", 0) != 0)
        throw std::runtime_error(path + ": unsupported archive version " + ver);
    std::string expect_sum = ioutil::trim(content.substr(cpos));
    if (expect_sum != ioutil::checksum_line(payload))
        throw std::runtime_error(path + ": checksum mismatch, file corrupted");

    FrameArchive ar;
    ar.case_name = keyval("case");
    CaseData cs = case_by_label(ar.case_name);
    auto dval = [&](const std::string& k) {
        double v;
        if (!ioutil::to_double(keyval(k), v)) throw ParseError(path, li, "malformed " + k);
        return v;
    };
    auto ival = [&](const std::string& k) {
        int v;
        if (!ioutil::to_int(keyval(k), v)) throw ParseError(path, li, "malformed " + k);
        return v;
    };
    ar.grid.x0 = dval("x0");
    ar.grid.y0 = dval("y0");
    ar.grid.x1 = dval("x1");
    ar.grid.y1 = dval("y1");
    ar.grid.nx = ival("nx");
    ar.grid.ny = ival("ny");
    ar.N = ival("N");
    ar.K = ival("K");
    int count = ival("count");
    ar.loops.reserve(count);
    for (int i = 0; i < count; ++i) {
        if (next() != "loop " + std::to_string(i))
            throw ParseError(path, li, "expected 'loop " + std::to_string(i) + "'");
        TwistedGroupLoop lp{cs, {}};
        lp.samples.reserve(ar.N);
        for (int j = 0; j < ar.N; ++j) {
            if (next() != "sample " + std::to_string(j))
                throw ParseError(path, li, "expected 'sample " + std::to_string(j) + "'");
            Mat M(cs.n, cs.n);
            for (int r = 0; r < cs.n; ++r) {
                std::istringstream row(next());
                for (int c = 0; c < cs.n; ++c) {
                    double re, im;
                    if (!(row >> re >> im))
                        throw ParseError(path, li, "malformed matrix row");
                    M(r, c) = cxd(re, im);
                }
            }
            lp.samples.push_back(std::move(M));
        }
        ar.loops.push_back(std::move(lp));
    }
    return ar;
}

// ---------------------------------------------------------------------------
// Reports: named residuals with values, tolerances and verdicts, plus
// free-form recorded fields; deterministic ordering.
// ---------------------------------------------------------------------------

struct ReportCheck {
    std::string name;
    double value = 0;
    double tol = 0;
    bool pass = false;
};

struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<ReportCheck> checks;
};

inline void add_check(Report& rep, const std::string& name, double value, double tol) {
    rep.checks.push_back({name, value, tol, value <= tol});
}

inline bool report_passed(const Report& rep) {
    for (const auto& c : rep.checks)
        if (!c.pass) return false;
    return true;
}

inline std::string report_text(const Report& rep) {
    std::ostringstream out;
    out << "hslag-report\nversion = 1.0\ncommand = " << rep.command << "\n";
    for (const auto& [k, v] : rep.fields) out << k << " = " << v << "\n";
    for (const auto& c : rep.checks)
        out << "check = " << c.name << ", " << ioutil::fmt(c.value) << ", " << ioutil::fmt(c.tol)
            << ", " << (c.pass ? "pass" : "fail") << "\n";
    return out.str();
}

inline void write_report(const std::string& path, const Report& rep) {
    ioutil::write_atomic(path, report_text(rep));
}

// ---------------------------------------------------------------------------
// Meshes and tables.
// ---------------------------------------------------------------------------

// OBJ export: layered grid of vertices, quads split into counterclockwise
// triangles, 2 (nx-1)(ny-1) faces per layer.
inline void write_mesh(const std::string& path, const std::vector<std::array<double, 3>>& verts,
                       int nx, int ny, int layers = 1) {
    if (int(verts.size()) != nx * ny * layers)
        throw std::invalid_argument("write_mesh: vertex count does not match the grid");
    using ioutil::fmt;
    std::ostringstream out;
    out << "# hslag mesh nx=" << nx << " ny=" << ny << " layers=" << layers << "\n";
    for (const auto& v : verts)
        out << "v " << fmt(v[0]) << " " << fmt(v[1]) << " " << fmt(v[2]) << "\n";
    for (int l = 0; l < layers; ++l) {
        int off = l * nx * ny;
        for (int iy = 0; iy + 1 < ny; ++iy)
            for (int ix = 0; ix + 1 < nx; ++ix) {
                int v00 = off + iy * nx + ix + 1;
                int v10 = v00 + 1;
                int v01 = v00 + nx;
                int v11 = v01 + 1;
                out << "f " << v00 << " " << v10 << " " << v11 << "\n";
                out << "f " << v00 << " " << v11 << " " << v01 << "\n";
            }
    }
    ioutil::write_atomic(path, out.str());
}

// Affine chart of the projective plane: (z1/z3, z2/z3) as four reals.
inline std::array<double, 4> chart_r4(const Vec& p, double tol = 1e-9) {
    if (p.size() != 3) throw std::invalid_argument("chart_r4: need a C^3 point");
    if (std::abs(p(2)) < tol)
        throw std::domain_error("chart_r4: point on the line at infinity of the chart");
    cxd w1 = p(0) / p(2), w2 = p(1) / p(2);
    return {w1.real(), w1.imag(), w2.real(), w2.imag()};
}

// Fixed orthogonal projection recorded in reports: keep the first three
// chart coordinates.
inline std::string mesh_projection_string() { return "[1 0 0 0; 0 1 0 0; 0 0 1 0]"; }

inline std::array<double, 3> project_chart(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2]};
}

// Three axis-aligned R^3 slices of C^3 = R^6, each pairing one complex
// coordinate plane with the real axis of the next.
inline std::array<std::array<double, 3>, 3> cone_slices(const Vec& p) {
    if (p.size() != 3) throw std::invalid_argument("cone_slices: need a C^3 point");
    return {{{p(0).real(), p(0).imag(), p(1).real()},
             {p(1).real(), p(1).imag(), p(2).real()},
             {p(2).real(), p(2).imag(), p(0).real()}}};
}

inline void write_samples(const std::string& path, const GridSpec& g,
                          const std::vector<SurfaceSample>& samples) {
    using ioutil::fmt;
    std::ostringstream out;
    out << "# hslag surface samples\n";
    out << "# columns: x y p1re p1im p2re p2im p3re p3im rho beta maslov_re maslov_im\n";
    for (size_t i = 0; i < samples.size(); ++i) {
        int ix = int(i) % g.nx, iy = int(i) / g.nx;
        const auto& s = samples[i];
        out << fmt(g.x(ix)) << " " << fmt(g.y(iy));
        for (int r = 0; r < 3; ++r)
            out << " " << fmt(s.point(r).real()) << " " << fmt(s.point(r).imag());
        out << " " << fmt(s.rho) << " " << fmt(s.beta) << " " << fmt(s.maslov_z.real()) << " "
            << fmt(s.maslov_z.imag()) << "\n";
    }
    ioutil::write_atomic(path, out.str());
}

// Six-column point table for cone samples in R^6.
inline void write_cone_table(const std::string& path, const std::vector<Vec>& points) {
    using ioutil::fmt;
    std::ostringstream out;
    out << "# hslag cone points\n# columns: z1re z1im z2re z2im z3re z3im\n";
    for (const auto& p : points) {
        if (p.size() != 3) throw std::invalid_argument("write_cone_table: need C^3 points");
        out << fmt(p(0).real()) << " " << fmt(p(0).imag()) << " " << fmt(p(1).real()) << " "
            << fmt(p(1).imag()) << " " << fmt(p(2).real()) << " " << fmt(p(2).imag()) << "\n";
    }
    ioutil::write_atomic(path, out.str());
}

}  // namespace hslag
