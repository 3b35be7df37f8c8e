#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "usf/errors.hpp"
#include "usf/excursion.hpp"
#include "usf/exit.hpp"
#include "usf/ladder.hpp"
#include "usf/mc.hpp"
#include "usf/model.hpp"
#include "usf/scale.hpp"

using json = nlohmann::ordered_json;
using namespace usf;

namespace {

std::string fmt(double v, bool pretty) {
    char b[40];
    std::snprintf(b, sizeof b, pretty ? "%.6g" : "%.17g", v);
    return b;
}

// Rows carry typed cells so one table serves CSV, JSON, and the aligned
// human-readable form.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<json>> rows;

    void row(std::initializer_list<json> cells) { rows.emplace_back(cells); }
};

std::string cell_text(const json& c, bool pretty) {
    if (c.is_number_float()) return fmt(c.get<double>(), pretty);
    if (c.is_string()) return c.get<std::string>();
    return c.dump();
}

void emit(const Table& t, const std::string& format, bool pretty) {
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : t.rows) {
            json obj;
            for (size_t i = 0; i < t.header.size(); ++i) obj[t.header[i]] = r[i];
            arr.push_back(obj);
        }
        std::printf("%s\n", arr.dump(2).c_str());
        return;
    }
    if (pretty) {
        std::vector<size_t> width(t.header.size());
        for (size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
        for (const auto& r : t.rows)
            for (size_t i = 0; i < r.size(); ++i)
                width[i] = std::max(width[i], cell_text(r[i], true).size());
        auto line = [&](const std::vector<std::string>& cells) {
            for (size_t i = 0; i < cells.size(); ++i)
                std::printf("%-*s%s", int(width[i]), cells[i].c_str(),
                            i + 1 < cells.size() ? "  " : "\n");
        };
        line(t.header);
        for (const auto& r : t.rows) {
            std::vector<std::string> cells;
            for (const auto& c : r) cells.push_back(cell_text(c, true));
            line(cells);
        }
        return;
    }
    for (size_t i = 0; i < t.header.size(); ++i)
        std::printf("%s%s", t.header[i].c_str(), i + 1 < t.header.size() ? "," : "\n");
    for (const auto& r : t.rows)
        for (size_t i = 0; i < r.size(); ++i)
            std::printf("%s%s", cell_text(r[i], false).c_str(), i + 1 < r.size() ? "," : "\n");
}

ChainSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("model file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("model file " + path + ": not a JSON object");
    if (j.contains("version") && j["version"] != 1)
        throw std::invalid_argument("model file " + path + ": unsupported version");
    ChainSpec s;
    try {
        s.h = j.at("h").get<double>();
        s.rate_up = j.at("rate_up").get<double>();
        if (j.contains("down"))
            for (const auto& a : j.at("down"))
                s.down_atoms.push_back({a.at("k").get<int>(), a.at("rate").get<double>()});
        if (j.contains("geo_tail") && !j["geo_tail"].is_null()) {
            const auto& t = j["geo_tail"];
            s.geo_tail =
                GeoTail{t.at("k0").get<int>(), t.at("c").get<double>(), t.at("a").get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("model file " + path + ": " + e.what());
    }
    validate(s);
    return s;
}

json model_json(const ChainSpec& s) {
    json j;
    j["version"] = 1;
    j["h"] = s.h;
    j["rate_up"] = s.rate_up;
    j["down"] = json::array();
    for (const auto& a : s.down_atoms) j["down"].push_back({{"k", a.k}, {"rate", a.rate}});
    if (s.geo_tail)
        j["geo_tail"] = {{"k0", s.geo_tail->k0}, {"c", s.geo_tail->c}, {"a", s.geo_tail->a}};
    return j;
}

double zscore(double mc, double analytic, double se) {
    if (se > 0.0) return (mc - analytic) / se;
    return mc == analytic ? 0.0 : std::numeric_limits<double>::infinity();
}

struct Options {
    std::string model;
    std::string format;  // resolved at dispatch: classify defaults to json
    bool pretty = false;
    std::vector<double> betas;
    std::vector<double> qs;
    double q = 0.0;
    double beta = 0.0;
    double x = 0.0;
    double y = 1.0;
    double p = 1.0;
    double theta = 0.0;
    double t = 1.0;
    int n_max = 20;
    int k_max = 200;
    std::int64_t paths = 100000;
    std::uint64_t seed = 1;
    std::optional<double> time_cap;
    std::optional<int> level_cap;
    std::string what = "two-sided";
    // reconstruct inputs
    double gamma = 0.0;
    double h = 1.0;
    std::vector<double> phis;
    std::optional<double> tail_c;
    double tail_a = 0.5;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--format", o.format, "output format (csv or json)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--pretty", o.pretty, "aligned human-readable table");
}

void add_model(CLI::App* cmd, Options& o) {
    cmd->add_option("--model", o.model, "model file (JSON)")->required();
}

SimConfig sim_config(const Options& o) {
    SimConfig cfg;
    cfg.master_seed = o.seed;
    cfg.n_paths = o.paths;
    cfg.time_cap = o.time_cap;
    cfg.level_cap = o.level_cap;
    return cfg;
}

void run_classify(const Options& o) {
    DriftClass d = classify(load_model(o.model));
    if (o.format == "json" && !o.pretty) {
        json j;
        j["direction"] = to_string(d.direction);
        j["psi_prime_0"] = d.psi_prime_0;
        j["phi_0"] = d.phi_0;
        j["phi_prime_0"] = d.phi_prime_0;
        std::printf("%s\n", j.dump().c_str());
        return;
    }
    Table t;
    t.header = {"direction", "psi_prime_0", "phi_0", "phi_prime_0"};
    t.row({to_string(d.direction), d.psi_prime_0, d.phi_0, d.phi_prime_0});
    emit(t, o.format, o.pretty);
}

void run_psi(const Options& o) {
    ChainSpec s = load_model(o.model);
    Table t;
    t.header = {"beta", "psi", "psi_prime"};
    for (double b : o.betas) t.row({b, psi(s, b), psi_prime(s, b)});
    emit(t, o.format, o.pretty);
}

void run_phi(const Options& o) {
    ChainSpec s = load_model(o.model);
    Table t;
    t.header = {"q", "phi", "phi_prime"};
    for (double q : o.qs) t.row({q, phi(s, q), phi_prime(s, q)});
    emit(t, o.format, o.pretty);
}

void run_scale(const Options& o) {
    ChainSpec s = load_model(o.model);
    ScaleTable tab = scale_table(s, o.q, o.n_max);
    Table t;
    t.header = {"k", "x", "W", "Z", "W_scaled"};
    for (int k = 0; k <= o.n_max; ++k)
        t.row({k, k * tab.h, tab.w[k], tab.z[k], tab.w_scaled[k]});
    emit(t, o.format, o.pretty);
}

void run_exit(const Options& o) {
    ChainSpec s = load_model(o.model);
    Table t;
    t.header = {"quantity", "value"};
    t.row({"two_sided_up", two_sided_up(s, o.q, o.x, o.y)});
    t.row({"down_before_up", down_before_up(s, o.q, o.x, o.y)});
    t.row({"up_passage_lt", up_passage_lt(s, o.y, o.q)});
    emit(t, o.format, o.pretty);
}

void run_ruin(const Options& o) {
    ChainSpec s = load_model(o.model);
    Table t;
    t.header = {"quantity", "value"};
    t.row({"ruin_lt", down_passage_lt(s, o.q, o.x)});
    if (o.q == 0.0) t.row({"ruin_prob", ruin_prob(s, o.x)});
    emit(t, o.format, o.pretty);
}

void run_wh(const Options& o) {
    ChainSpec s = load_model(o.model);
    Table t;
    t.header = {"quantity", "value"};
    t.row({"kappa_star", kappa_star(s, o.q, o.beta)});
    t.row({"kappa_hat", kappa_hat(s, o.q, o.beta)});
    t.row({"ascending_exponent", ascending_exponent(s, o.beta)});
    t.row({"descending_exponent", descending_exponent(s, o.beta)});
    emit(t, o.format, o.pretty);
}

void run_ladder(const Options& o) {
    LadderData d = extract_ladder(load_model(o.model));
    if (o.format == "json") {
        json j;
        j["h"] = d.h;
        j["x"] = d.x_factor;
        j["gamma_asc"] = d.gamma_asc;
        j["q_desc"] = d.q_desc;
        j["phi"] = d.phi_atoms;
        if (d.phi_tail)
            j["phi_tail"] = {
                {"k0", d.phi_tail->k0}, {"c", d.phi_tail->c}, {"a", d.phi_tail->a}};
        std::printf("%s\n", j.dump(2).c_str());
        return;
    }
    Table t;
    t.header = {"quantity", "value"};
    t.row({"h", d.h});
    t.row({"x", d.x_factor});
    t.row({"gamma_asc", d.gamma_asc});
    t.row({"q_desc", d.q_desc});
    for (size_t k = 0; k < d.phi_atoms.size(); ++k)
        t.row({"phi_" + std::to_string(k + 1), d.phi_atoms[k]});
    if (d.phi_tail) {
        t.row({"phi_tail_k0", d.phi_tail->k0});
        t.row({"phi_tail_c", d.phi_tail->c});
        t.row({"phi_tail_a", d.phi_tail->a});
    }
    emit(t, o.format, o.pretty);
}

void run_reconstruct(const Options& o) {
    LadderData d;
    d.h = o.h;
    d.gamma_asc = o.gamma;
    d.q_desc = o.q;
    d.phi_atoms = o.phis;
    if (o.tail_c)
        d.phi_tail = GeoTail{static_cast<int>(o.phis.size()) + 1, *o.tail_c, o.tail_a};
    ParentResult r = reconstruct_parent(d);
    json j = model_json(r.spec);
    j["x"] = r.x;
    std::printf("%s\n", j.dump(2).c_str());
}

void run_excursion(const Options& o, bool with_theta) {
    ChainSpec s = load_model(o.model);
    ExcursionStats st = excursion_stats(s);
    Table t;
    t.header = {"quantity", "value"};
    t.row({"expected_length", st.expected_length});
    t.row({"p_infinite", st.p_infinite});
    if (with_theta) {
        IltResult r = ilt_exponent(s, o.theta, o.k_max);
        t.row({"ilt_exponent", r.value});
        t.row({"ilt_tail_bound", r.tail_bound});
        t.row({"ilt_k_used", r.k_used});
        t.row({"ilt_truncated", r.truncated});
    }
    emit(t, o.format, o.pretty);
}

void run_infimum(const Options& o, bool with_beta) {
    ChainSpec s = load_model(o.model);
    if (with_beta) {
        Table t;
        t.header = {"quantity", "value"};
        if (o.q > 0.0)
            t.row({"inf_lt_at_exp", inf_lt_at_exp(s, o.q, o.beta)});
        else
            t.row({"overall_inf_lt", overall_inf_lt(s, o.beta)});
        emit(t, o.format, o.pretty);
        return;
    }
    std::vector<double> pmf = inf_pmf_table(s, o.q, o.k_max);
    Table t;
    t.header = {"k", "p"};
    for (int k = 0; k <= o.k_max; ++k) t.row({k, pmf[k]});
    emit(t, o.format, o.pretty);
}

void run_simulate(const Options& o) {
    ChainSpec s = load_model(o.model);
    SimConfig cfg = sim_config(o);
    Table t;
    t.header = {"quantity", "analytic", "mc_mean", "mc_stderr", "z"};
    auto row = [&](const char* name, double analytic, const SimEstimate& e) {
        t.row({name, analytic, e.mean, e.std_error, zscore(e.mean, analytic, e.std_error)});
    };
    if (o.what == "two-sided") {
        row("two_sided_up", two_sided_up(s, o.q, o.x, o.y),
            estimate_two_sided(s, o.q, o.x, o.y, cfg));
    } else if (o.what == "ruin") {
        RuinEstimate r = estimate_ruin_lt(s, o.q, o.x, cfg);
        row("ruin_lt", down_passage_lt(s, o.q, o.x), r.est);
        t.row({"truncation_bias_bound", 0.0, r.bias_bound, 0.0, 0.0});
    } else if (o.what == "sup") {
        SupEstimate e = estimate_sup_at_exp(s, o.p, cfg);
        row("sup_failure", sup_at_exp(s, o.p), e.failure);
    } else if (o.what == "excursion") {
        SimConfig c2 = cfg;
        if (!c2.level_cap) c2.level_cap = 50;
        ExcursionEstimate e = estimate_excursion(s, c2);
        ExcursionStats st = excursion_stats(s);
        row("frac_infinite", st.p_infinite, e.frac_infinite);
        if (std::isfinite(st.expected_length)) {
            row("mean_length", st.expected_length, e.mean_length);
            row("mean_jumps", s.total_rate() * st.expected_length, e.mean_jumps);
        }
        t.row({"return_bias_bound", 0.0, e.return_bias_bound, 0.0, 0.0});
    } else if (o.what == "martingale") {
        MartingalePair m = estimate_stopped_martingale(s, o.q, o.t, cfg);
        row("w_martingale", scale_table(s, o.q, 0).w[0], m.w_part);
        row("z_martingale", 1.0, m.z_part);
    } else if (o.what == "exp-martingale") {
        row("exp_martingale", 1.0, estimate_exp_martingale(s, o.beta, o.t, cfg));
    }
    emit(t, o.format, o.pretty);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluctuation calculator for upwards skip-free lattice chains"};
    app.require_subcommand(1);
    Options o;

    CLI::App* classify_cmd = app.add_subcommand("classify", "drift direction and exponent data");
    add_model(classify_cmd, o);
    add_common(classify_cmd, o);

    CLI::App* psi_cmd = app.add_subcommand("psi", "Laplace exponent at given points");
    add_model(psi_cmd, o);
    psi_cmd->add_option("--beta", o.betas, "evaluation points")->required();
    add_common(psi_cmd, o);

    CLI::App* phi_cmd = app.add_subcommand("phi", "inverse exponent at given points");
    add_model(phi_cmd, o);
    phi_cmd->add_option("--q", o.qs, "evaluation points")->required();
    add_common(phi_cmd, o);

    CLI::App* scale_cmd = app.add_subcommand("scale", "scale function table");
    add_model(scale_cmd, o);
    scale_cmd->add_option("--q", o.q, "discount rate")->capture_default_str();
    scale_cmd->add_option("--n-max", o.n_max, "last lattice index")->capture_default_str();
    add_common(scale_cmd, o);

    CLI::App* exit_cmd = app.add_subcommand("exit", "two-sided exit laws");
    add_model(exit_cmd, o);
    exit_cmd->add_option("--q", o.q, "discount rate")->capture_default_str();
    exit_cmd->add_option("--x", o.x, "lower buffer (length units)")->capture_default_str();
    exit_cmd->add_option("--y", o.y, "upper target (lattice point)")->capture_default_str();
    add_common(exit_cmd, o);

    CLI::App* ruin_cmd = app.add_subcommand("ruin", "downward passage transform");
    add_model(ruin_cmd, o);
    ruin_cmd->add_option("--q", o.q, "discount rate")->capture_default_str();
    ruin_cmd->add_option("--x", o.x, "initial buffer (length units)")->capture_default_str();
    add_common(ruin_cmd, o);

    CLI::App* wh_cmd = app.add_subcommand("wh", "space-time ladder factors");
    add_model(wh_cmd, o);
    wh_cmd->add_option("--q", o.q, "time argument alpha")->capture_default_str();
    wh_cmd->add_option("--beta", o.beta, "space argument")->capture_default_str();
    add_common(wh_cmd, o);

    CLI::App* ladder_cmd = app.add_subcommand("ladder", "descending ladder data of a chain");
    add_model(ladder_cmd, o);
    add_common(ladder_cmd, o);

    CLI::App* rec_cmd = app.add_subcommand("reconstruct", "parent chain from ladder data");
    rec_cmd->set_help_flag("--help", "print help");  // frees -h for the lattice step
    add_common(rec_cmd, o);
    rec_cmd->add_option("--gamma", o.gamma, "ascending killing rate")->capture_default_str();
    rec_cmd->add_option("--q", o.q, "descending killing rate")->capture_default_str();
    rec_cmd->add_option("--phi", o.phis, "dense ladder jump rates from k = 1");
    rec_cmd->add_option("--h", o.h, "lattice step")->capture_default_str();
    double tc = 0.0;
    CLI::Option* tc_opt = rec_cmd->add_option("--tail-c", tc, "geometric tail rate");
    rec_cmd->add_option("--tail-a", o.tail_a, "geometric tail ratio")->capture_default_str();

    CLI::App* exc_cmd = app.add_subcommand("excursion", "excursion statistics");
    add_model(exc_cmd, o);
    CLI::Option* theta_opt =
        exc_cmd->add_option("--theta", o.theta, "inverse local time argument");
    exc_cmd->add_option("--k-max", o.k_max, "series cutoff")->capture_default_str();
    add_common(exc_cmd, o);

    CLI::App* inf_cmd = app.add_subcommand("infimum", "infimum law at an exponential time");
    add_model(inf_cmd, o);
    inf_cmd->add_option("--q", o.q, "exponential rate")->capture_default_str();
    CLI::Option* beta_opt = inf_cmd->add_option("--beta", o.beta, "transform argument");
    inf_cmd->add_option("--k-max", o.k_max, "last pmf index")->capture_default_str();
    add_common(inf_cmd, o);

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo versus analytic values");
    add_model(sim_cmd, o);
    sim_cmd->add_option("--what", o.what, "estimand")
        ->check(CLI::IsMember(
            {"two-sided", "ruin", "sup", "excursion", "martingale", "exp-martingale"}))
        ->capture_default_str();
    sim_cmd->add_option("--paths", o.paths, "number of paths")->capture_default_str();
    sim_cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
    sim_cmd->add_option("--q", o.q, "discount rate")->capture_default_str();
    sim_cmd->add_option("--x", o.x, "lower buffer")->capture_default_str();
    sim_cmd->add_option("--y", o.y, "upper target")->capture_default_str();
    sim_cmd->add_option("--p", o.p, "exponential rate")->capture_default_str();
    sim_cmd->add_option("--beta", o.beta, "martingale tilt")->capture_default_str();
    sim_cmd->add_option("--t", o.t, "martingale horizon")->capture_default_str();
    double cap_t = 0.0;
    CLI::Option* cap_t_opt = sim_cmd->add_option("--time-cap", cap_t, "path time cap");
    int cap_l = 0;
    CLI::Option* cap_l_opt = sim_cmd->add_option("--level-cap", cap_l, "path level cap");
    add_common(sim_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*tc_opt) o.tail_c = tc;
        if (*cap_t_opt) o.time_cap = cap_t;
        if (*cap_l_opt) o.level_cap = cap_l;
        if (o.format.empty()) o.format = app.got_subcommand(classify_cmd) ? "json" : "csv";
        if (app.got_subcommand(classify_cmd)) run_classify(o);
        else if (app.got_subcommand(psi_cmd)) run_psi(o);
        else if (app.got_subcommand(phi_cmd)) run_phi(o);
        else if (app.got_subcommand(scale_cmd)) run_scale(o);
        else if (app.got_subcommand(exit_cmd)) run_exit(o);
        else if (app.got_subcommand(ruin_cmd)) run_ruin(o);
        else if (app.got_subcommand(wh_cmd)) run_wh(o);
        else if (app.got_subcommand(ladder_cmd)) run_ladder(o);
        else if (app.got_subcommand(rec_cmd)) run_reconstruct(o);
        else if (app.got_subcommand(exc_cmd)) run_excursion(o, static_cast<bool>(*theta_opt));
        else if (app.got_subcommand(inf_cmd)) run_infimum(o, static_cast<bool>(*beta_opt));
        else if (app.got_subcommand(sim_cmd)) run_simulate(o);
    } catch (const NoRootError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const NegativeMassError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const TrivialCaseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
