// kgflow command-line driver: JSON config in, CSV/JSON results out.
// Exit codes: 0 ok, 1 runtime abort, 2 configuration error.

#include "kgflow/nonlinearity.hpp"
#include "kgflow/profile.hpp"
#include "kgflow/semiclassical.hpp"
#include "kgflow/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace kgflow;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RuntimeAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ config

json defaults() {
    return json{
        {"command", ""},
        {"nonlinearity", json::array({json{{"u", 3}, {"utx", 0}, {"uxx", 0}, {"ut", 0}, {"ux", 0}, {"coeff", 1.0}}})},
        {"grid", {{"n", 4096}, {"L", 200.0}}},
        {"solver",
         {{"dt", 0.0},
          {"t_end", 100.0},
          {"epsilon", 0.05},
          {"epsilons", json::array()},
          {"sobolev_s", 2.0},
          {"blowup_factor", 4.0},
          {"sample_every", 0.5},
          {"data", {{"kind", "gaussian"}, {"width", 1.0}, {"center", 0.0}, {"velocity_weight", 0.0}, {"amplitude", 0.0}}}}},
        {"frame", {{"M", 4096}, {"X", 1.2}, {"gamma_width", 1.0}}},
        {"profile",
         {{"stations", json::array({0.0, 0.5})},
          {"delta0", 0.05},
          {"t_min", 0.0},
          {"nuisance", true},
          {"input", ""},
          {"normal_form_times", json::array()}}},
        {"moyal",
         {{"h_exponents", json::array({4, 5, 6, 7, 8, 9})},
          {"ks", json::array({0, 1, 2})},
          {"half_width", 3.0},
          {"a", {{"x0", 0.1}, {"xi0", 0.1}, {"width2", 0.3}}},
          {"b", {{"x0", -0.1}, {"xi0", -0.1}, {"width2", 0.3}}}}},
        {"opnorm",
         {{"h_exponents", json::array({4, 5, 6, 7, 8, 9})},
          {"target", "l2_to_linf"},
          {"points", 2048},
          {"half_width", 1.2},
          {"gamma_width", 1.0},
          {"x_window", 0.8}}},
        {"seed", 12345},
        {"output_dir", "out"},
    };
}

/// Overlays user values on the defaults; unknown keys and type changes are errors.
void merge(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown key: " + key);
        json& slot = base[it.key()];
        const json& v = it.value();
        if (slot.is_object() && !slot.empty() && key != "nonlinearity") {
            merge(slot, v, key);
        } else if (slot.is_number() && v.is_number()) {
            slot = v;
        } else if (slot.type() == v.type() || (slot.is_array() && v.is_array())) {
            slot = v;
        } else {
            throw ConfigError("wrong type for " + key);
        }
    }
}

Rational parse_coeff(const json& c) {
    try {
        if (c.is_number()) return rational_from_double(c.get<double>());
        if (c.is_string()) return rational_from_string(c.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(std::string("malformed coefficient: ") + e.what());
    }
    throw ConfigError("coefficient must be a number or a rational string");
}

CubicNonlinearity parse_nonlinearity(const json& list) {
    if (!list.is_array()) throw ConfigError("nonlinearity must be a list of records");
    static const std::set<std::string> allowed = {"u", "utx", "uxx", "ut", "ux", "coeff"};
    static const char* slots[5] = {"u", "utx", "uxx", "ut", "ux"};
    CubicNonlinearity p;
    for (const json& r : list) {
        if (!r.is_object()) throw ConfigError("nonlinearity record must be an object");
        for (auto it = r.begin(); it != r.end(); ++it)
            if (!allowed.count(it.key())) throw ConfigError("unknown nonlinearity field: " + it.key());
        if (!r.contains("coeff")) throw ConfigError("nonlinearity record without coeff");
        MonomialKey k;
        for (int s = 0; s < 5; ++s) {
            if (!r.contains(slots[s])) continue;
            const json& e = r.at(slots[s]);
            if (!e.is_number_integer() || e.get<long>() < 0)
                throw ConfigError(std::string("exponent of ") + slots[s] + " must be a non-negative integer");
            k.e[static_cast<std::size_t>(s)] = e.get<unsigned>();
        }
        p.add(k, parse_coeff(r.at("coeff")));
    }
    try {
        validate(p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

std::vector<double> h_list(const json& exps) {
    std::vector<double> hs;
    for (const json& e : exps) {
        if (!e.is_number_integer() || e.get<int>() < 0) throw ConfigError("h exponents must be non-negative integers");
        hs.push_back(std::ldexp(1.0, -e.get<int>()));
    }
    if (hs.size() < 2) throw ConfigError("at least two h values are needed for a slope");
    return hs;
}

struct Context {
    json cfg;
    fs::path out;
    unsigned threads = 1;
};

// ------------------------------------------------------------------ output

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw RuntimeAbort("cannot write " + p.string());
    return f;
}

void write_norms(const fs::path& p, const std::vector<NormRecord>& norms) {
    auto f = open_out(p);
    f << "t,linf_u,sqrt_t_linf,e0,ez1,hs\n";
    for (auto& n : norms)
        f << num(n.t) << ',' << num(n.linf_u) << ',' << num(n.sqrt_t_linf) << ',' << num(n.e0) << ',' << num(n.ez1)
          << ',' << num(n.hs) << '\n';
}

void write_snapshot(const fs::path& p, const KGState& s, const Grid1D& g) {
    auto f = open_out(p);
    f << "x,u,ut\n";
    for (std::size_t j = 0; j < g.n; ++j) f << num(g.x(j)) << ',' << num(s.u[j]) << ',' << num(s.ut[j]) << '\n';
}

// ------------------------------------------------------------------ simulation plumbing

struct SimSetup {
    Grid1D g;
    SolverConfig solver;
    DataSpec data;
    CubicNonlinearity p;
    double sample_every;
};

SimSetup sim_setup(const json& c) {
    SimSetup s;
    const json& grid = c["grid"];
    try {
        s.g = Grid1D(grid["n"].get<std::size_t>(), grid["L"].get<double>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const json& sv = c["solver"];
    s.solver.dt = sv["dt"].get<double>();
    s.solver.t_end = sv["t_end"].get<double>();
    s.solver.epsilon = sv["epsilon"].get<double>();
    s.solver.sobolev_s = sv["sobolev_s"].get<double>();
    s.solver.blowup_factor = sv["blowup_factor"].get<double>();
    s.sample_every = sv["sample_every"].get<double>();
    if (s.solver.t_end < 1.0) throw ConfigError("solver.t_end must be >= 1");
    if (s.solver.dt < 0.0) throw ConfigError("solver.dt must be >= 0");
    if (!(s.sample_every > 0.0 && s.sample_every <= 1.0)) throw ConfigError("solver.sample_every must lie in (0, 1]");
    const json& d = sv["data"];
    s.data.kind = d["kind"].get<std::string>();
    s.data.width = d["width"].get<double>();
    s.data.center = d["center"].get<double>();
    s.data.velocity_weight = d["velocity_weight"].get<double>();
    s.data.amplitude = d["amplitude"].get<double>();
    s.p = parse_nonlinearity(c["nonlinearity"]);
    return s;
}

std::vector<double> epsilons(const json& c) {
    std::vector<double> e;
    for (const json& v : c["solver"]["epsilons"]) {
        if (!v.is_number()) throw ConfigError("solver.epsilons must be numbers");
        e.push_back(v.get<double>());
    }
    if (e.empty()) e.push_back(c["solver"]["epsilon"].get<double>());
    for (double v : e)
        if (!(v >= 0.0)) throw ConfigError("epsilon must be non-negative");
    return e;
}

InitialData initial(const SimSetup& s, double eps) {
    try {
        return make_initial(s.data, eps, s.g, s.solver.sobolev_s);
    } catch (const BudgetError& e) {
        throw ConfigError(e.what());
    }
}

/// Runs jobs on up to `threads` workers; the first error (by job index) is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
    std::vector<std::exception_ptr> errors(n);
    std::mutex m;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(m);
                if (next >= n) return;
                i = next++;
            }
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n))); ++t)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

fs::path run_dir(const Context& ctx, double eps, std::size_t count) {
    if (count == 1) return ctx.out;
    return ctx.out / ("eps_" + num(eps));
}

// ------------------------------------------------------------------ commands

int cmd_check_null(const Context& ctx) {
    CubicNonlinearity p = parse_nonlinearity(ctx.cfg["nonlinearity"]);
    NullReport r = check_null(p);
    json q = json::array();
    for (auto& c : r.q_coeffs) q.push_back(c.get_str());
    json report{{"nonlinearity", p.str()},
                {"verdict", r.verdict},
                {"Q_coefficients", q},
                {"phi_description", r.phi.str()},
                {"phi1_description", r.phi1.str()}};
    auto f = open_out(ctx.out / "null_report.json");
    f << report.dump(2) << '\n';
    std::cout << "null condition: " << (r.verdict ? "satisfied" : "violated") << '\n';
    return 0;
}

int cmd_simulate(const Context& ctx) {
    SimSetup s = sim_setup(ctx.cfg);
    auto eps = epsilons(ctx.cfg);
    std::vector<InitialData> inits;
    for (double e : eps) inits.push_back(initial(s, e));
    parallel_for(eps.size(), ctx.threads, [&](std::size_t i) {
        SolverConfig cfg = s.solver;
        cfg.epsilon = eps[i];
        fs::path dir = run_dir(ctx, eps[i], eps.size());
        std::vector<NormRecord> partial;
        try {
            RunResult r = run(cfg, s.g, s.p, inits[i].state, sample_schedule(cfg.t_end, s.sample_every), {}, &partial);
            write_norms(dir / "norms.csv", r.norms);
            write_snapshot(dir / "snapshot_final.csv", r.final_state, s.g);
        } catch (const std::runtime_error& e) {
            if (!dynamic_cast<const BlowupError*>(&e) && !dynamic_cast<const NaNError*>(&e)) throw;
            write_norms(dir / "norms.csv", partial);
            throw RuntimeAbort(std::string("epsilon ") + num(eps[i]) + ": " + e.what());
        }
    });
    return 0;
}

RVec stations_of(const json& c) {
    RVec st;
    for (const json& v : c["profile"]["stations"]) {
        if (!v.is_number()) throw ConfigError("profile.stations must be numbers");
        st.push_back(v.get<double>());
        if (std::abs(st.back()) > 0.9) throw ConfigError("stations must satisfy |x| <= 0.9");
    }
    if (st.empty()) throw InsufficientData("empty station list");
    return st;
}

void write_profile(const fs::path& p, const ProfileSeries& s) {
    auto f = open_out(p);
    f << "t,x_station,re,im\n";
    for (std::size_t n = 0; n < s.times.size(); ++n)
        for (std::size_t k = 0; k < s.stations.size(); ++k)
            f << num(s.times[n]) << ',' << num(s.stations[k]) << ',' << num(s.values[k][n].real()) << ','
              << num(s.values[k][n].imag()) << '\n';
}

ProfileSeries read_profile(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw ConfigError("cannot read profile input " + p.string());
    std::string line;
    std::getline(f, line);
    if (line != "t,x_station,re,im") throw ConfigError("profile input has unexpected columns");
    ProfileSeries s;
    std::vector<std::tuple<double, double, cplx>> rows;
    std::set<double> st, ts;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c, d;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') || !std::getline(ss, d))
            throw ConfigError("malformed profile row: " + line);
        rows.emplace_back(std::stod(a), std::stod(b), cplx(std::stod(c), std::stod(d)));
        ts.insert(std::stod(a));
        st.insert(std::stod(b));
    }
    s.stations.assign(st.begin(), st.end());
    s.times.assign(ts.begin(), ts.end());
    s.values.assign(s.stations.size(), CVec(s.times.size(), cplx(0.0)));
    if (rows.size() != s.stations.size() * s.times.size()) throw ConfigError("profile input is not a full table");
    for (auto& [t, x, v] : rows) {
        auto it = std::lower_bound(s.times.begin(), s.times.end(), t) - s.times.begin();
        auto is = std::lower_bound(s.stations.begin(), s.stations.end(), x) - s.stations.begin();
        s.values[static_cast<std::size_t>(is)][static_cast<std::size_t>(it)] = v;
    }
    return s;
}

/// Simulates each epsilon with a station recorder and optional normal-form samples.
std::vector<ProfileSeries> collect_profiles(const Context& ctx, const SimSetup& s, const std::vector<double>& eps) {
    RVec st = stations_of(ctx.cfg);
    const json& fr = ctx.cfg["frame"];
    std::set<double> nf_times;
    for (const json& v : ctx.cfg["profile"]["normal_form_times"]) nf_times.insert(v.get<double>());
    const double delta0 = ctx.cfg["profile"]["delta0"].get<double>();
    if (!(delta0 > 0.0 && delta0 < 0.5)) throw ConfigError("profile.delta0 must lie in (0, 0.5)");
    std::vector<InitialData> inits;
    for (double e : eps) inits.push_back(initial(s, e));
    std::vector<ProfileSeries> out(eps.size());
    parallel_for(eps.size(), ctx.threads, [&](std::size_t i) {
        SolverConfig cfg = s.solver;
        cfg.epsilon = eps[i];
        fs::path dir = run_dir(ctx, eps[i], eps.size());
        StationRecorder rec(s.g, st);
        std::vector<NormalFormSample> nf;
        auto times = sample_schedule(cfg.t_end, s.sample_every);
        times.insert(times.end(), nf_times.begin(), nf_times.end());
        std::sort(times.begin(), times.end());
        std::vector<NormRecord> partial;
        try {
            RunResult r = run(cfg, s.g, s.p, inits[i].state, times, [&](const KGState& k) {
                rec(k);
                for (double t : nf_times)
                    if (std::abs(k.t - t) < 1e-9)
                        nf.push_back(normal_form_sample(k, s.g, s.p, fr["X"].get<double>(), fr["M"].get<std::size_t>(),
                                                        delta0, fr["gamma_width"].get<double>()));
            }, &partial);
            write_norms(dir / "norms.csv", r.norms);
        } catch (const std::runtime_error& e) {
            if (!dynamic_cast<const BlowupError*>(&e) && !dynamic_cast<const NaNError*>(&e)) throw;
            write_norms(dir / "norms.csv", partial);
            write_profile(dir / "profile.csv", rec.series());
            throw RuntimeAbort(std::string("epsilon ") + num(eps[i]) + ": " + e.what());
        }
        write_profile(dir / "profile.csv", rec.series());
        if (!nf.empty()) {
            auto f = open_out(dir / "normal_form.csv");
            f << "t,sigma_minus_lambda,f_minus_lambda\n";
            for (auto& n : nf) f << num(n.t) << ',' << num(n.sigma_minus_lambda) << ',' << num(n.f_minus_lambda) << '\n';
        }
        out[i] = rec.series();
    });
    return out;
}

int cmd_extract_profile(const Context& ctx) {
    SimSetup s = sim_setup(ctx.cfg);
    collect_profiles(ctx, s, epsilons(ctx.cfg));
    return 0;
}

int cmd_fit(const Context& ctx) {
    const json& pc = ctx.cfg["profile"];
    FitOptions opt;
    opt.t_min = pc["t_min"].get<double>();
    opt.nuisance = pc["nuisance"].get<bool>();
    CubicNonlinearity p = parse_nonlinearity(ctx.cfg["nonlinearity"]);
    HalfExpr phi1 = phi_one(p);
    auto eps = epsilons(ctx.cfg);

    std::vector<ProfileSeries> series;
    const std::string input = pc["input"].get<std::string>();
    if (!input.empty()) {
        if (eps.size() != 1) throw ConfigError("a profile input file pairs with a single epsilon");
        series.push_back(read_profile(input));
    } else {
        SimSetup s = sim_setup(ctx.cfg);
        series = collect_profiles(ctx, s, eps);
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        RVec ph1;
        for (double x : series[i].stations) ph1.push_back(phi1.eval(x));
        FitResult r = fit_modified_scattering(series[i], eps[i], ph1, opt);
        auto f = open_out(run_dir(ctx, eps[i], eps.size()) / "fit.csv");
        f << "x_station,amplitude,phase_slope,predicted_slope,relative_error,residual_rms\n";
        for (auto& st : r.stations)
            f << num(st.x) << ',' << num(st.amplitude) << ',' << num(st.phase_slope) << ',' << num(st.predicted_slope)
              << ',' << num(st.relative_error) << ',' << num(st.residual_rms) << '\n';
    }
    return 0;
}

SymbolDescriptor gaussian_from(const json& j) {
    for (const char* k : {"x0", "xi0", "width2"})
        if (!j.contains(k) || !j[k].is_number()) throw ConfigError(std::string("moyal symbol needs numeric ") + k);
    if (!(j["width2"].get<double>() > 0.0)) throw ConfigError("moyal symbol width2 must be positive");
    return gaussian_symbol(j["x0"].get<double>(), j["xi0"].get<double>(), j["width2"].get<double>());
}

int cmd_moyal_bench(const Context& ctx) {
    const json& m = ctx.cfg["moyal"];
    std::vector<unsigned> ks;
    for (const json& k : m["ks"]) {
        if (!k.is_number_integer() || k.get<int>() < 0 || k.get<int>() > 4) throw ConfigError("moyal.ks must lie in 0..4");
        ks.push_back(k.get<unsigned>());
    }
    MoyalBench b = moyal_error(gaussian_from(m["a"]), gaussian_from(m["b"]), ks, h_list(m["h_exponents"]),
                               m["half_width"].get<double>());
    auto f = open_out(ctx.out / "moyal_bench.csv");
    f << "h,k,points,error,converged\n";
    for (auto& r : b.rows)
        f << num(r.h) << ',' << r.k << ',' << r.points << ',' << num(r.error) << ',' << (r.converged ? 1 : 0) << '\n';
    auto g = open_out(ctx.out / "moyal_slopes.csv");
    g << "k,slope\n";
    for (std::size_t i = 0; i < ks.size(); ++i) g << ks[i] << ',' << num(b.slopes[i]) << '\n';
    for (auto& r : b.rows)
        if (!r.converged) std::cerr << "warning: power iteration not converged at h=" << r.h << " k=" << r.k << '\n';
    return 0;
}

int cmd_opnorm_bench(const Context& ctx) {
    const json& o = ctx.cfg["opnorm"];
    const std::string target = o["target"].get<std::string>();
    NormTarget t;
    if (target == "l2_to_linf")
        t = NormTarget::l2_to_linf;
    else if (target == "l2_to_l2")
        t = NormTarget::l2_to_l2;
    else
        throw ConfigError("opnorm.target must be l2_to_linf or l2_to_l2");
    std::size_t points = o["points"].get<std::size_t>();
    if (points < 2 || (points & (points - 1))) throw ConfigError("opnorm.points must be a power of two");
    OpnormProbe p = opnorm_probe(lambda_localized_family(o["gamma_width"].get<double>(), o["x_window"].get<double>()),
                                 h_list(o["h_exponents"]), t, o["half_width"].get<double>(), points);
    auto f = open_out(ctx.out / "opnorm.csv");
    f << "h,norm,converged\n";
    for (auto& r : p.rows) f << num(r.h) << ',' << num(r.norm) << ',' << (r.converged ? 1 : 0) << '\n';
    auto g = open_out(ctx.out / "opnorm_exponent.csv");
    g << "target,exponent\n" << target << ',' << num(p.exponent) << '\n';
    return 0;
}

json load_config(const std::string& path, const std::string& command) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path);
    json user;
    try {
        user = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    json cfg = defaults();
    merge(cfg, user, "");
    const std::string declared = cfg["command"].get<std::string>();
    if (!declared.empty() && declared != command)
        throw ConfigError("config declares command '" + declared + "' but '" + command + "' was invoked");
    cfg["command"] = command;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kgflow: cubic quasi-linear Klein-Gordon laboratory"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    unsigned threads = 1;
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--threads", threads, "worker threads for epsilon sweeps")->check(CLI::PositiveNumber);

    const std::vector<std::pair<std::string, int (*)(const Context&)>> commands = {
        {"check-null", cmd_check_null},         {"simulate", cmd_simulate},
        {"extract-profile", cmd_extract_profile}, {"fit-scattering", cmd_fit},
        {"moyal-bench", cmd_moyal_bench},       {"opnorm-bench", cmd_opnorm_bench},
    };
    app.fallthrough();
    for (auto& [name, _] : commands) app.add_subcommand(name, "");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string command;
    int (*handler)(const Context&) = nullptr;
    for (auto& [name, fn] : commands)
        if (app.got_subcommand(name)) {
            command = name;
            handler = fn;
        }

    try {
        Context ctx;
        ctx.cfg = load_config(config_path, command);
        if (!out_dir.empty()) ctx.cfg["output_dir"] = out_dir;
        ctx.out = ctx.cfg["output_dir"].get<std::string>();
        ctx.threads = threads;
        auto echo = open_out(ctx.out / "resolved_config.json");
        echo << ctx.cfg.dump(2) << '\n';
        echo.close();
        return handler(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InsufficientData& e) {
        std::cerr << "insufficient data: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const RuntimeAbort& e) {
        std::cerr << "aborted: " << e.what() << '\n';
        return 1;
    } catch (const UnwrapError& e) {
        std::cerr << "aborted: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "aborted: " << e.what() << '\n';
        return 1;
    }
}
