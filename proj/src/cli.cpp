#include "annulus/cli.hpp"

#include "annulus/characteristic.hpp"
#include "annulus/errors.hpp"
#include "annulus/oracle.hpp"
#include "annulus/winding.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace annulus::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kMaxGridPoints = 10000;

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Complex constantValue(std::string_view text, std::size_t base)
{
    ExprPtr e;
    try {
        e = parseExpr(text);
    } catch (const ParseError& p) {
        throw ParseError("bad constant", base + p.offset());
    }
    if (!isConstantTree(e)) throw ParseError("expected a constant", base);
    return evaluate(e, Complex{});
}

FunctionModel parseRationalSpec(std::string_view body, std::size_t base)
{
    std::vector<std::pair<std::string_view, std::size_t>> parts;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= body.size(); ++k) {
        if (k == body.size() || body[k] == ';') {
            parts.emplace_back(body.substr(start, k - start), base + start);
            start = k + 1;
        }
    }
    const auto [scaleText, scaleAt] = parts.front();
    if (trim(scaleText).empty()) throw ParseError("missing scale", scaleAt);
    const Complex scale = constantValue(scaleText, scaleAt);
    if (scale == Complex{}) throw ParseError("scale must be nonzero", scaleAt);

    std::vector<RootFactor> factors;
    for (std::size_t p = 1; p < parts.size(); ++p) {
        auto [text, at] = parts[p];
        const std::string_view t = trim(text);
        if (t.empty()) continue;
        const std::size_t lead = at + static_cast<std::size_t>(t.data() - text.data());
        if (t.front() != '(' || t.back() != ')') throw ParseError("expected (root, multiplicity)", lead);
        const std::string_view inner = t.substr(1, t.size() - 2);
        int depth = 0;
        std::size_t comma = std::string_view::npos;
        for (std::size_t k = 0; k < inner.size(); ++k) {
            if (inner[k] == '(') ++depth;
            if (inner[k] == ')') --depth;
            if (inner[k] == ',' && depth == 0) comma = k;
        }
        if (comma == std::string_view::npos) throw ParseError("expected ',' in factor", lead);
        const Complex root = constantValue(inner.substr(0, comma), lead + 1);
        const std::string_view multText = trim(inner.substr(comma + 1));
        int mult = 0;
        auto [ptr, ec] = std::from_chars(multText.data(), multText.data() + multText.size(), mult);
        if (ec != std::errc{} || ptr != multText.data() + multText.size()) {
            throw ParseError("multiplicity must be an integer", lead + comma + 2);
        }
        if (mult == 0) throw ParseError("multiplicity must be nonzero", lead + comma + 2);
        factors.push_back({root, mult});
    }
    return FunctionModel::rational(scale, std::move(factors));
}

AnnulusWindow window(double tau, double r)
{
    try {
        return AnnulusWindow(tau, r);
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("window", e.what());
    }
}

struct Options {
    std::string fn;
    double tau = 2.0;
    double r = 3.0;
    std::string tauGrid;
    std::string rGrid;
    std::vector<std::string> suites;
    int nPhi = 512;
    double tol = 1e-10;
    std::int64_t maxNodes = std::int64_t{1} << 20;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out;
    std::string format;
    std::uint64_t seed = 1;

    QuadConfig quad() const
    {
        QuadConfig c;
        c.tol = tol;
        c.maxNodes = maxNodes;
        c.jobs = jobs;
        return c;
    }
};

Json errorJson(std::string_view kind, const std::string& message, std::optional<std::size_t> offset = {})
{
    Json e;
    e["kind"] = kind;
    e["message"] = message;
    if (offset) e["offset"] = *offset;
    Json out;
    out["error"] = std::move(e);
    return out;
}

// Maps library exceptions onto (kind, exit code).
std::pair<std::string, int> classify(const std::exception& e)
{
    if (dynamic_cast<const ParseError*>(&e)) return {"parse", kInputError};
    if (dynamic_cast<const IntegralityError*>(&e)) return {"non_convergence", kNonConvergence};
    if (dynamic_cast<const BoundaryRootError*>(&e)) return {"boundary_root", kInputError};
    if (dynamic_cast<const UnsupportedError*>(&e)) return {"unsupported", kInputError};
    if (dynamic_cast<const SingularPointError*>(&e)) return {"singular_point", kInputError};
    if (dynamic_cast<const std::invalid_argument*>(&e)) return {"invalid_argument", kInputError};
    return {"internal", kInputError};
}

// Writes to --out when given, otherwise to the caller's stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw CLI::ValidationError("--out", "cannot open " + path);
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

int cmdEval(const Options& o, std::ostream& out, std::ostream& err)
{
    Sink sink(o.out, out);
    try {
        const FunctionModel f = parseFunctionSpec(o.fn);
        const CharacteristicReport rep = characteristic(f, window(o.tau, o.r), o.quad());
        Json j;
        j["N"] = rep.N;
        j["m_inner"] = rep.mInner;
        j["m_outer"] = rep.mOuter;
        j["m_unit"] = rep.mUnit;
        j["m_annulus"] = rep.mAnnulus;
        j["c_f"] = rep.cf;
        j["T"] = rep.T;
        j["tau"] = o.tau;
        j["r"] = o.r;
        j["quad_error"] = rep.quadError;
        j["converged"] = rep.converged;
        *sink << j.dump(2) << '\n';
        return rep.converged ? kOk : kNonConvergence;
    } catch (const ParseError& e) {
        *sink << errorJson("parse", e.what(), e.offset()).dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        auto [kind, code] = classify(e);
        *sink << errorJson(kind, e.what()).dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return code;
    }
}

int cmdSurface(const Options& o, std::ostream& out, std::ostream& err)
{
    std::vector<double> taus;
    std::vector<double> rs;
    FunctionModel f = FunctionModel::constant(1.0);
    try {
        f = parseFunctionSpec(o.fn);
        taus = o.tauGrid.empty() ? std::vector<double>{o.tau} : parseGrid(o.tauGrid);
        rs = o.rGrid.empty() ? std::vector<double>{o.r} : parseGrid(o.rGrid);
        for (double t : taus) window(t, 1.0);
        for (double r : rs) window(1.0, r);
        if (taus.size() * rs.size() > kMaxGridPoints) {
            throw std::invalid_argument("grid exceeds 10000 points");
        }
    } catch (const ParseError& e) {
        Sink sink(o.out, out);
        *sink << errorJson("parse", e.what(), e.offset()).dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        Sink sink(o.out, out);
        *sink << errorJson(classify(e).first, e.what()).dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    const bool json = o.format == "json";
    CharacteristicEvaluator ev(f, o.quad());
    std::vector<double> radii{1.0};
    for (double t : taus) radii.push_back(1.0 / t);
    radii.insert(radii.end(), rs.begin(), rs.end());
    try {
        ev.prefetch(radii);
    } catch (const std::exception&) {
        // Rows report their own failures below.
    }

    Sink sink(o.out, out);
    std::ostream& os = *sink;
    if (json) {
        os << "[";
    } else {
        os << "tau,r,N,m_annulus,c_f,T,quad_error,status\n";
    }
    int status = kOk;
    bool first = true;
    for (double tau : taus) {
        for (double r : rs) {
            std::string rowStatus = "ok";
            CharacteristicReport rep;
            bool valid = true;
            try {
                rep = ev.at(AnnulusWindow(tau, r));
                if (!rep.converged) {
                    rowStatus = "nonconverged";
                    status = std::max(status, static_cast<int>(kNonConvergence));
                }
            } catch (const std::exception& e) {
                valid = false;
                auto [kind, code] = classify(e);
                rowStatus = "error:" + kind;
                status = std::max(status, code == kInputError ? static_cast<int>(kNonConvergence) : code);
            }
            const double nan = std::numeric_limits<double>::quiet_NaN();
            const std::array<double, 7> cols{tau,
                                             r,
                                             valid ? rep.N : nan,
                                             valid ? rep.mAnnulus : nan,
                                             valid ? rep.cf : nan,
                                             valid ? rep.T : nan,
                                             valid ? rep.quadError : nan};
            if (json) {
                Json row;
                const char* names[] = {"tau", "r", "N", "m_annulus", "c_f", "T", "quad_error"};
                for (std::size_t k = 0; k < cols.size(); ++k) {
                    if (std::isfinite(cols[k])) {
                        row[names[k]] = cols[k];
                    } else {
                        row[names[k]] = nullptr;
                    }
                }
                row["status"] = rowStatus;
                os << (first ? "\n" : ",\n") << "  " << row.dump();
            } else {
                for (double v : cols) os << formatNumber(v) << ',';
                os << rowStatus << '\n';
            }
            first = false;
        }
    }
    if (json) os << "\n]\n";
    if (status != kOk) err << "warning: some rows did not evaluate cleanly\n";
    return status;
}

struct Entry {
    std::string suite;
    Json parameters;
    std::optional<double> residual;
    double tolerance = 0.0;
    bool pass = false;
    std::string error;
};

Json windowParams(const AnnulusWindow& w)
{
    Json p;
    p["tau"] = w.tau;
    p["r"] = w.r;
    return p;
}

template <class Body>
void guarded(std::vector<Entry>& out, const std::string& suite, Json params, Body&& body)
{
    try {
        body(out);
    } catch (const std::exception& e) {
        Entry en;
        en.suite = suite;
        en.parameters = std::move(params);
        en.error = classify(e).first + ": " + e.what();
        out.push_back(std::move(en));
    }
}

const FunctionModel& requireRationalModel(const FunctionModel& f)
{
    if (!f.isRational()) throw UnsupportedError("suite needs a rational function");
    return f;
}

void runSuite(const std::string& suite, const FunctionModel& f, const Options& o, std::vector<Entry>& out)
{
    const QuadConfig cfg = o.quad();
    const AnnulusWindow w = window(o.tau, o.r);
    auto add = [&](Json params, double residual, double tolerance) {
        Entry e;
        e.suite = suite;
        e.parameters = std::move(params);
        e.residual = residual;
        e.tolerance = tolerance;
        e.pass = residual <= tolerance;
        out.push_back(std::move(e));
    };

    if (suite == "jensen1") {
        Json p;
        p["s"] = w.inner();
        p["r"] = w.r;
        guarded(out, suite, p, [&](auto&) {
            if (!(w.inner() < w.r)) throw std::invalid_argument("jensen1 needs 1/tau < r");
            const ResidualReport rr = jensenV1Residual(f, w.inner(), w.r, cfg);
            add(p, rr.residual, 1e-8 + 10.0 * rr.quadError);
        });
    } else if (suite == "jensen2") {
        guarded(out, suite, windowParams(w), [&](auto&) {
            const ResidualReport rr = jensenV2Residual(f, w, cfg);
            add(windowParams(w), rr.residual, 1e-8 + 10.0 * rr.quadError);
        });
    } else if (suite == "eq12") {
        std::vector<double> radii{1.5, 2.0, 2.7};
        for (double t : {w.tau, w.r}) {
            if (t != 1.0 && std::find(radii.begin(), radii.end(), t) == radii.end()) radii.push_back(t);
        }
        for (double t : radii) {
            Json p;
            p["t"] = t;
            guarded(out, suite, p, [&](auto&) {
                try {
                    const auto [a, b] = checkEq12Eq13(requireRationalModel(f), t);
                    add(p, std::abs(a) + std::abs(b), 0.0);
                } catch (const BoundaryRootError&) {
                    // Root on the measurement circle: the relation is not asserted there.
                }
            });
        }
    } else if (suite == "cartan") {
        Json p = windowParams(w);
        p["nphi"] = o.nPhi;
        guarded(out, suite, p, [&](auto&) {
            const ResidualReport rr = cartanResidual(requireRationalModel(f), w, o.nPhi, cfg);
            add(p, rr.residual, 1e-6);
        });
    } else if (suite == "lemma4") {
        Json p;
        p["nphi"] = o.nPhi;
        guarded(out, suite, p, [&](auto&) {
            const ResidualReport rr = lemma4Residual(f, o.nPhi, cfg);
            add(p, rr.residual, 1e-6);
        });
    } else if (suite == "lemma5") {
        std::mt19937_64 rng(o.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int produced = 0;
        for (int attempt = 0; attempt < 100 && produced < 5; ++attempt) {
            const double t = 0.5 + 2.0 * unit(rng);
            const Complex zeta = std::polar(3.0 * unit(rng), 2.0 * std::numbers::pi * unit(rng));
            Json p;
            p["t"] = t;
            p["zeta_re"] = zeta.real();
            p["zeta_im"] = zeta.imag();
            try {
                const ResidualReport rr = lemma5Residual(f, t, zeta, cfg);
                add(p, rr.residual, 1e-9 + 10.0 * rr.quadError);
                ++produced;
            } catch (const Error&) {
                // A root of f or f - zeta near the circle; draw again.
            }
        }
        if (produced == 0) {
            Entry e;
            e.suite = suite;
            e.error = "no admissible (t, zeta) drawn";
            out.push_back(std::move(e));
        }
    } else if (suite == "lemma6") {
        Json p;
        p["ngrid"] = 2048;
        guarded(out, suite, p, [&](auto&) {
            const ResidualReport rr = lemma6Residual(f, 2048, cfg);
            add(p, rr.residual, 1e-3);
        });
    } else if (suite == "fft") {
        guarded(out, suite, windowParams(w), [&](auto&) {
            const FunctionModel& g = requireRationalModel(f);
            for (int i = 0; i < 5; ++i) {
                for (int k = 0; k < 5; ++k) {
                    const Complex a{-3.0 + 1.5 * i, -3.0 + 1.5 * k};
                    Json p = windowParams(w);
                    p["a_re"] = a.real();
                    p["a_im"] = a.imag();
                    FftReport rep;
                    try {
                        rep = fft(g, a, w, cfg);
                    } catch (const BoundaryRootError&) {
                        continue;
                    }
                    Json pi = p;
                    pi["check"] = "identity";
                    add(pi, std::abs(rep.identityResidual), 1e-7 + 10.0 * rep.quadError);
                    Json pe = p;
                    pe["check"] = "eps1_bound";
                    add(pe, std::abs(rep.eps1), rep.eps1Bound + 1e-9);
                }
            }
        });
    } else if (suite == "theorem1") {
        guarded(out, suite, Json::object(), [&](auto&) {
            std::vector<double> grid;
            for (int k = 0; k < 5; ++k) grid.push_back(std::exp(0.5 * k));
            const std::vector<double> taus = o.tauGrid.empty() ? grid : parseGrid(o.tauGrid);
            const std::vector<double> rs = o.rGrid.empty() ? grid : parseGrid(o.rGrid);
            const Theorem1Report rep = theorem1Scan(f, taus, rs, cfg);
            for (const Theorem1Check& c : rep.checks) {
                Json p;
                p["check"] = c.name;
                p["where"] = c.where;
                p["applicable"] = c.applicable;
                Entry e;
                e.suite = suite;
                e.parameters = std::move(p);
                e.residual = c.worst;
                e.tolerance = c.tolerance;
                e.pass = !c.applicable || c.pass;
                out.push_back(std::move(e));
            }
        });
    } else {
        throw CLI::ValidationError("--suite", "unknown suite " + suite);
    }
}

int cmdVerify(const Options& o, std::ostream& out, std::ostream& err)
{
    FunctionModel f = FunctionModel::constant(1.0);
    try {
        f = parseFunctionSpec(o.fn);
        window(o.tau, o.r);
    } catch (const ParseError& e) {
        Sink sink(o.out, out);
        *sink << errorJson("parse", e.what(), e.offset()).dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    if (o.suites.empty()) throw CLI::ValidationError("--suite", "at least one suite is required");

    std::vector<Entry> entries;
    for (const std::string& s : o.suites) runSuite(s, f, o, entries);

    Json arr = Json::array();
    bool allPass = true;
    for (const Entry& e : entries) {
        Json j;
        j["suite"] = e.suite;
        j["parameters"] = e.parameters.is_null() ? Json::object() : e.parameters;
        if (e.residual) {
            j["residual"] = *e.residual;
        } else {
            j["residual"] = nullptr;
        }
        j["tolerance"] = e.tolerance;
        j["pass"] = e.pass;
        if (!e.error.empty()) j["error"] = e.error;
        arr.push_back(std::move(j));
        allPass = allPass && e.pass;
    }
    Sink sink(o.out, out);
    *sink << arr.dump(2) << '\n';
    return allPass ? kOk : kVerificationFailure;
}

}  // namespace

FunctionModel parseFunctionSpec(std::string_view spec)
{
    const std::string_view t = trim(spec);
    if (t.empty()) throw ParseError("empty function specification", 0);
    constexpr std::string_view kPrefix = "rational:";
    if (t.starts_with(kPrefix)) {
        const std::size_t base = static_cast<std::size_t>(t.data() - spec.data()) + kPrefix.size();
        return parseRationalSpec(t.substr(kPrefix.size()), base);
    }
    const FunctionModel f = FunctionModel::parse(spec);
    if (auto r = rationalForm(f)) return *r;
    return f;
}

std::vector<double> parseGrid(std::string_view spec)
{
    double lo = 0.0;
    double hi = 0.0;
    long n = 0;
    const std::size_t c1 = spec.find(':');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : spec.find(':', c1 + 1);
    auto number = [&](std::string_view s, auto& v) {
        s = trim(s);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    if (c2 == std::string_view::npos || !number(spec.substr(0, c1), lo) ||
        !number(spec.substr(c1 + 1, c2 - c1 - 1), hi) || !number(spec.substr(c2 + 1), n)) {
        throw std::invalid_argument("grid must be lo:hi:n");
    }
    if (!(lo > 0.0) || !(hi >= lo) || n < 1 || static_cast<std::size_t>(n) > kMaxGridPoints) {
        throw std::invalid_argument("grid needs 0 < lo <= hi and 1 <= n <= 10000");
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    const double span = std::log(hi / lo);
    for (long k = 0; k < n; ++k) {
        out[static_cast<std::size_t>(k)] = k == 0 ? lo : (k == n - 1 ? hi : lo * std::exp(span * k / (n - 1)));
    }
    return out;
}

std::string formatNumber(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
    return std::string(buf, ptr);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Two-parameter Nevanlinna characteristic on annuli"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--fn", o.fn, "function: DSL text or 'rational: scale; (root,mult); ...'")->required();
        sub->add_option("--tol", o.tol, "quadrature tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--max-nodes", o.maxNodes, "maximum trapezoid nodes")->check(CLI::PositiveNumber);
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "output path (default stdout)");
        sub->add_option("--seed", o.seed, "seed for randomized test points");
    };

    CLI::App* eval = app.add_subcommand("eval", "T(tau, r; f) and its components as JSON");
    common(eval);
    eval->add_option("--tau", o.tau, "tau >= 1");
    eval->add_option("--r", o.r, "r >= 1");
    eval->add_option("--format", o.format, "json")->check(CLI::IsMember({"json"}));

    CLI::App* surface = app.add_subcommand("surface", "T over a (tau, r) grid");
    common(surface);
    surface->add_option("--tau", o.tau, "single tau when no grid is given");
    surface->add_option("--r", o.r, "single r when no grid is given");
    surface->add_option("--tau-grid", o.tauGrid, "lo:hi:n, log spaced");
    surface->add_option("--r-grid", o.rGrid, "lo:hi:n, log spaced");
    surface->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* verify = app.add_subcommand("verify", "run identity suites, JSON report");
    common(verify);
    verify->add_option("--tau", o.tau, "tau >= 1");
    verify->add_option("--r", o.r, "r >= 1");
    verify->add_option("--tau-grid", o.tauGrid, "theorem1 tau grid lo:hi:n");
    verify->add_option("--r-grid", o.rGrid, "theorem1 r grid lo:hi:n");
    verify->add_option("--suite", o.suites,
                       "comma list of jensen1,jensen2,eq12,cartan,lemma4,lemma5,lemma6,fft,theorem1")
        ->delimiter(',')
        ->required();
    verify->add_option("--nphi", o.nPhi, "phi nodes / panels")->check(CLI::PositiveNumber);
    verify->add_option("--format", o.format, "json")->check(CLI::IsMember({"json"}));

    try {
        app.parse(argc, argv);
        if (eval->parsed()) return cmdEval(o, out, err);
        if (surface->parsed()) return cmdSurface(o, out, err);
        return cmdVerify(o, out, err);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace annulus::cli
