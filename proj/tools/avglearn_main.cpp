#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "avglearn/scenario_io.hpp"

namespace {

using namespace avglearn;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitSemantic = 3;
constexpr int kExitIo = 4;

struct Options {
    std::string path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int jobs = 1;
    std::optional<double> tol;
    bool as_json = false;
};

void apply_overrides(Scenario& s, const Options& opt) {
    if (opt.seed) s.seed = *opt.seed;
    if (opt.trials) s.trials = *opt.trials;
    if (opt.tol) s.tol = *opt.tol;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file " + path);
    out << content;
    if (!out) throw std::ios_base::failure("cannot write output file " + path);
}

// Sampled analysis times for time-varying schedules.
std::vector<long> analysis_times(const Scenario& s) {
    if (s.schedule.kind() == ScheduleKind::Constant || s.schedule.kind() == ScheduleKind::Fj) return {0};
    std::vector<long> ts{0};
    for (long t = 1; t < s.horizon; t *= 4) ts.push_back(t);
    if (ts.back() != s.horizon - 1) ts.push_back(s.horizon - 1);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

json analyze_point(const Matrix& a, const LearningRates& e) {
    const Matrix b = subtract_rates(a, e);
    const DiGraph g = build_digraph(b);
    const SccDecomposition d = strongly_connected_components(g);
    const AnchorReport report = is_condensely_anchored(a, e);

    json sccs = json::array();
    for (std::size_t c = 0; c < d.components.size(); ++c) {
        json comp = json::object();
        json verts = json::array();
        for (int v : d.components[c]) verts.push_back(v + 1);
        comp["vertices"] = verts;
        comp["sink"] = std::find(d.sinks.begin(), d.sinks.end(), static_cast<int>(c)) != d.sinks.end();
        comp["period"] = d.periods[c] ? json(*d.periods[c]) : json("single_vertex_no_loop");
        sccs.push_back(comp);
    }
    json out = {{"sccs", sccs},
                {"condensation_dot", condensation_to_dot(d)},
                {"digraph_dot", to_dot(g)},
                {"condensely_aperiodic", is_condensely_aperiodic(b)},
                {"agents", to_json(report)}};
    if (b.row_class() != RowClass::General) {
        const auto idx = index_of_contraction(b);
        out["index_of_contraction"] = idx ? json(*idx) : json("infinite");
    }
    return out;
}

int cmd_analyze(const Options& opt) {
    Scenario s = load_scenario(opt.path);
    apply_overrides(s, opt);
    json report = json::object();
    json points = json::array();
    for (long t : analysis_times(s)) {
        const SchedulePoint p = s.schedule.at(t);
        json entry = analyze_point(p.a, p.e);
        entry["t"] = t;
        points.push_back(std::move(entry));
    }
    report["analysis"] = points;
    const std::string text = report.dump(2) + "\n";
    if (!opt.out.empty()) write_file(opt.out, text);
    std::cout << text;
    return kExitOk;
}

json certificate_for(const Scenario& s) {
    if (s.noise && !s.noise->is_zero()) {
        const long T = s.horizon;
        const auto rho_at = [&](long t) {
            return induced_norm(s.schedule.b_at(std::min(T - 1, t - 1)), PNorm::Infinity);
        };
        std::optional<RhoFamily> family;
        if (s.schedule.kind() == ScheduleKind::Constant) family = RhoFamily::Constant;
        return to_json(check_small_gain(rho_at, T, family));
    }
    switch (s.schedule.kind()) {
        case ScheduleKind::Constant:
            return to_json(certify_time_invariant(s.schedule.constant_a(), s.schedule.constant_e()));
        case ScheduleKind::HarmonicSplit:
        case ScheduleKind::TailLog:
            return to_json(certify_vanishing_rates(s.schedule));
        case ScheduleKind::Example34:
        case ScheduleKind::Sequence:
            return to_json(certify_mixed_norm(s.schedule));
        case ScheduleKind::Fj: {
            // Compromise-mode error dynamics contract iff rho(diag(lambda) A) < 1.
            const Matrix& a = s.schedule.constant_a();
            const LearningRates& lambda = s.schedule.constant_e();
            Matrix la = a;
            for (int i = 0; i < a.size(); ++i)
                for (int j = 0; j < a.size(); ++j) la.set(i, j, lambda(i) * a(i, j));
            const double rho = spectral_radius(la);
            CertificateReport report;
            report.fired_rule = "fj_equilibrium_spectral";
            report.witnesses["rho"] = rho;
            report.notes = "verdict concerns the error dynamics around the compromise equilibrium";
            if (rho < 1.0 - kSpectralTol)
                report.verdict = Verdict::ZeroConvergent;
            else if (rho > 1.0 + kSpectralTol)
                report.verdict = Verdict::NotZeroConvergent;
            else
                report.verdict = Verdict::Inconclusive;
            return to_json(report);
        }
    }
    throw InvalidScenario("unknown schedule kind");
}

int cmd_certify(const Options& opt) {
    Scenario s = load_scenario(opt.path);
    apply_overrides(s, opt);
    const json report = certificate_for(s);
    const std::string text = report.dump(2) + "\n";
    if (!opt.out.empty()) write_file(opt.out, text);
    if (opt.as_json) {
        std::cout << text;
    } else {
        if (report.contains("verdict")) {
            std::cout << "verdict: " << report.at("verdict").get<std::string>() << "\n"
                      << "rule:    " << report.at("fired_rule").get<std::string>() << "\n";
            if (!report.at("notes").get<std::string>().empty())
                std::cout << "notes:   " << report.at("notes").get<std::string>() << "\n";
            std::cout << "witnesses: " << report.at("witnesses").dump() << "\n";
        } else {
            std::cout << text;
        }
    }
    return kExitOk;
}

int cmd_simulate(const Options& opt) {
    Scenario s = load_scenario(opt.path);
    apply_overrides(s, opt);
    const Trajectory traj = simulate(s);
    const std::string csv = trajectory_csv(traj, s.n);
    if (!opt.out.empty()) write_file(opt.out, csv);
    if (opt.as_json) {
        json summary = {{"final_err", traj.errors.back()}, {"steps", traj.states.size() - 1}};
        summary["converged_at"] = traj.converged_at ? json(*traj.converged_at) : json();
        std::cout << summary.dump(2) << "\n";
    } else {
        if (traj.converged_at)
            std::cout << "converged_at: " << *traj.converged_at << "\n";
        else
            std::cout << "converged_at: -\n";
        std::cout << "final_err: " << format_double(traj.errors.back()) << "\n";
    }
    if (opt.out.empty()) std::cout << csv;
    return kExitOk;
}

std::vector<long> default_checkpoints(const Scenario& s) {
    std::vector<long> cps;
    if (s.noise && s.noise->kind == NoiseKind::BlockAlternating) {
        long t = 0;
        for (long len : alternating_block_lengths(s.noise->b1, s.noise->b2, s.noise->blocks)) {
            t += len;
            if (t <= s.horizon) cps.push_back(t);
        }
    } else {
        for (long t = 2; t < s.horizon; t *= 2) cps.push_back(t);
        cps.push_back(s.horizon);
    }
    return cps;
}

int cmd_noise(const Options& opt) {
    Scenario s = load_scenario(opt.path);
    apply_overrides(s, opt);
    if (!s.noise) throw InvalidScenario("noise command requires a noise spec");
    const std::vector<long> cps = default_checkpoints(s);
    const Ensemble ens = simulate_noisy(s, s.trials, s.seed, cps, opt.jobs);
    std::vector<double> profile;
    if (cps.size() >= 2 && ens.trials >= 1000) profile = w1_time_profile(ens, 0, cps);
    const std::string csv = ensemble_csv(ens, profile);
    if (!opt.out.empty()) write_file(opt.out, csv);

    const long T = s.horizon;
    const auto rho_at = [&](long t) {
        return induced_norm(s.schedule.b_at(std::min(T - 1, t - 1)), PNorm::Infinity);
    };
    std::optional<RhoFamily> family;
    if (s.schedule.kind() == ScheduleKind::Constant) family = RhoFamily::Constant;
    const json gain = to_json(check_small_gain(rho_at, T, family));
    const bool alternating = s.noise->kind == NoiseKind::BlockAlternating;
    if (opt.as_json) {
        json summary = {{"small_gain", gain},
                        {"w1_profile", profile},
                        {"final_mean_err", ens.mean_err[T]},
                        {"final_max_err", ens.max_err[T]},
                        {"trials", ens.trials}};
        if (alternating) summary["note"] = "block-alternating schedule; no single limit law expected";
        std::cout << summary.dump(2) << "\n";
    } else {
        std::cout << "small_gain: " << gain.dump() << "\n";
        if (!profile.empty()) {
            std::cout << "w1_profile:";
            for (double w : profile) std::cout << " " << format_double(w);
            std::cout << "\n";
            if (alternating) std::cout << "note: block-alternating schedule; no single limit law expected\n";
        }
        std::cout << "final_mean_err: " << format_double(ens.mean_err[T]) << "\n";
        std::cout << "final_max_err: " << format_double(ens.max_err[T]) << "\n";
    }
    if (opt.out.empty()) std::cout << csv;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and convergence certification for averaging-plus-learning consensus dynamics"};
    app.require_subcommand(1);

    Options opt;
    std::string command;
    for (const char* name : {"analyze", "certify", "simulate", "noise"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("scenario", opt.path, "scenario JSON file")->required();
        sub->add_option("--out", opt.out, "output file (report JSON or CSV)");
        sub->add_option("--seed", opt.seed, "override scenario seed");
        sub->add_option("--trials", opt.trials, "override scenario trial count");
        sub->add_option("--jobs", opt.jobs, "worker threads for Monte-Carlo trials");
        sub->add_option("--tol", opt.tol, "override scenario tolerance");
        sub->add_flag("--json", opt.as_json, "print the full JSON report");
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitParse;
    }

    try {
        if (command == "analyze") return cmd_analyze(opt);
        if (command == "certify") return cmd_certify(opt);
        if (command == "simulate") return cmd_simulate(opt);
        if (command == "noise") return cmd_noise(opt);
        std::cerr << "unknown command\n";
        return kExitParse;
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSemantic;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSemantic;
    }
}
