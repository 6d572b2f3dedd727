#include "avglearn/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace avglearn {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key)) throw InvalidScenario("unknown key \"" + key + "\" in " + where);
}

double parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == text.size())
        throw InvalidScenario("malformed rational \"" + text + "\" (expected \"p/q\")");
    long long p = 0, q = 0;
    const char* begin = text.data();
    auto r1 = std::from_chars(begin, begin + slash, p);
    auto r2 = std::from_chars(begin + slash + 1, begin + text.size(), q);
    if (r1.ec != std::errc{} || r1.ptr != begin + slash || r2.ec != std::errc{} ||
        r2.ptr != begin + text.size())
        throw InvalidScenario("malformed rational \"" + text + "\" (expected \"p/q\")");
    if (q == 0) throw InvalidScenario("rational \"" + text + "\" has zero denominator");
    return static_cast<double>(p) / static_cast<double>(q);
}

double parse_number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_rational(v.get<std::string>());
    throw InvalidScenario("expected number or \"p/q\" string in " + where);
}

Vec parse_vector(const json& v, int n, const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw InvalidScenario(where + " must be an array of length n");
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = parse_number(v[i], where);
    return out;
}

Matrix parse_matrix(const json& v, int n, const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw InvalidScenario(where + " must be an n x n array of arrays");
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        if (!v[i].is_array() || static_cast<int>(v[i].size()) != n)
            throw InvalidScenario(where + " must be an n x n array of arrays");
        for (int j = 0; j < n; ++j) entries.push_back(parse_number(v[i][j], where));
    }
    return Matrix(n, std::move(entries));
}

Distribution parse_distribution(const json& v) {
    if (!v.is_object()) throw InvalidScenario("noise.dist must be an object");
    if (!v.contains("name")) throw InvalidScenario("noise.dist needs a name");
    const std::string name = v.at("name").get<std::string>();
    if (name == "uniform") {
        reject_unknown_keys(v, {"name", "a", "b"}, "noise.dist");
        return Distribution::uniform(parse_number(v.at("a"), "dist.a"), parse_number(v.at("b"), "dist.b"));
    }
    if (name == "gaussian") {
        reject_unknown_keys(v, {"name", "mean", "sd"}, "noise.dist");
        return Distribution::gaussian(parse_number(v.at("mean"), "dist.mean"),
                                      parse_number(v.at("sd"), "dist.sd"));
    }
    if (name == "two_point") {
        reject_unknown_keys(v, {"name", "p", "x1", "x2"}, "noise.dist");
        return Distribution::two_point(parse_number(v.at("p"), "dist.p"),
                                       parse_number(v.at("x1"), "dist.x1"),
                                       parse_number(v.at("x2"), "dist.x2"));
    }
    if (name == "degenerate") {
        reject_unknown_keys(v, {"name", "c"}, "noise.dist");
        return Distribution::degenerate(parse_number(v.at("c"), "dist.c"));
    }
    throw InvalidScenario("unknown distribution \"" + name + "\"");
}

NoiseSpec parse_noise(const json& v) {
    if (!v.is_object()) throw InvalidScenario("noise must be an object");
    if (!v.contains("kind")) throw InvalidScenario("noise needs a kind");
    const std::string kind = v.at("kind").get<std::string>();
    if (kind == "zero") {
        reject_unknown_keys(v, {"kind"}, "noise");
        return NoiseSpec::zero();
    }
    if (kind == "vanishing_scaled") {
        reject_unknown_keys(v, {"kind", "dist", "decay_power"}, "noise");
        const double power = v.contains("decay_power") ? parse_number(v.at("decay_power"), "decay_power") : 2.0;
        return NoiseSpec::vanishing_scaled(parse_distribution(v.at("dist")), power);
    }
    if (kind == "iid") {
        reject_unknown_keys(v, {"kind", "dist", "independent"}, "noise");
        NoiseSpec spec = NoiseSpec::iid(parse_distribution(v.at("dist")));
        if (v.contains("independent")) spec.per_coordinate_independent = v.at("independent").get<bool>();
        return spec;
    }
    if (kind == "block_alternating") {
        reject_unknown_keys(v, {"kind", "dist", "b1", "b2", "blocks"}, "noise");
        return NoiseSpec::block_alternating(parse_number(v.at("b1"), "b1"), parse_number(v.at("b2"), "b2"),
                                            v.at("blocks").get<int>(), parse_distribution(v.at("dist")));
    }
    throw InvalidScenario("unknown noise kind \"" + kind + "\"");
}

ScheduleWindow parse_schedule(const json& v, int n, long horizon) {
    if (!v.is_object()) throw InvalidScenario("schedule must be an object");
    if (!v.contains("kind")) throw InvalidScenario("schedule needs a kind");
    const std::string kind = v.at("kind").get<std::string>();
    if (kind == "constant") {
        reject_unknown_keys(v, {"kind", "A", "E"}, "schedule");
        Matrix a = parse_matrix(v.at("A"), n, "schedule.A");
        Vec rates = parse_vector(v.at("E"), n, "schedule.E");
        return ScheduleWindow::constant(std::move(a), LearningRates(std::move(rates)), horizon);
    }
    if (kind == "sequence") {
        reject_unknown_keys(v, {"kind", "A_list", "E_list"}, "schedule");
        const json& alist = v.at("A_list");
        const json& elist = v.at("E_list");
        if (!alist.is_array() || !elist.is_array() || alist.size() != elist.size() || alist.empty())
            throw InvalidScenario("sequence schedule needs matching nonempty A_list/E_list");
        std::vector<Matrix> as;
        std::vector<LearningRates> es;
        for (std::size_t t = 0; t < alist.size(); ++t) {
            as.push_back(parse_matrix(alist[t], n, "schedule.A_list"));
            es.emplace_back(parse_vector(elist[t], n, "schedule.E_list"));
        }
        return ScheduleWindow::sequence(std::move(as), std::move(es));
    }
    if (kind == "example_3_4") {
        reject_unknown_keys(v, {"kind"}, "schedule");
        if (n != 2) throw InvalidScenario("example_3_4 schedule needs n = 2");
        return ScheduleWindow::example34(horizon);
    }
    if (kind == "harmonic_split") {
        reject_unknown_keys(v, {"kind"}, "schedule");
        return ScheduleWindow::harmonic_split(n, horizon);
    }
    if (kind == "tail_log") {
        reject_unknown_keys(v, {"kind", "T", "c"}, "schedule");
        if (n != 2) throw InvalidScenario("tail_log schedule needs n = 2");
        return ScheduleWindow::tail_log(horizon, v.at("T").get<long>(), parse_number(v.at("c"), "schedule.c"));
    }
    if (kind == "fj") {
        reject_unknown_keys(v, {"kind", "A", "lambda"}, "schedule");
        Matrix a = parse_matrix(v.at("A"), n, "schedule.A");
        Vec lambda = parse_vector(v.at("lambda"), n, "schedule.lambda");
        return ScheduleWindow::fj(std::move(a), LearningRates(std::move(lambda)), horizon);
    }
    throw InvalidScenario("unknown schedule kind \"" + kind + "\"");
}

}  // namespace

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) throw InvalidScenario("scenario must be a JSON object");
    reject_unknown_keys(doc, {"n", "sigma_bar", "x0", "schedule", "noise", "horizon", "tol", "seed", "trials"},
                        "scenario");
    for (const char* key : {"n", "sigma_bar", "x0"})
        if (!doc.contains(key)) throw InvalidScenario(std::string("scenario is missing \"") + key + "\"");

    Scenario s;
    s.n = doc.at("n").get<int>();
    if (s.n < 1) throw InvalidScenario("n must be positive");

    const json& sigma = doc.at("sigma_bar");
    if (sigma.is_array()) {
        s.sigma_bar = parse_vector(sigma, s.n, "sigma_bar");
    } else {
        s.sigma_bar.assign(s.n, parse_number(sigma, "sigma_bar"));
    }
    s.x0 = parse_vector(doc.at("x0"), s.n, "x0");

    if (doc.contains("tol")) s.tol = parse_number(doc.at("tol"), "tol");
    if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("trials")) s.trials = doc.at("trials").get<int>();
    if (doc.contains("noise")) s.noise = parse_noise(doc.at("noise"));

    const bool block_noise = s.noise && s.noise->kind == NoiseKind::BlockAlternating;
    if (block_noise) {
        if (doc.contains("schedule"))
            throw InvalidScenario("block_alternating noise defines its own schedule; drop the schedule key");
        if (s.n != 1) throw InvalidScenario("block_alternating noise needs n = 1");
        Scenario blocks = block_counterexample(s.noise->b1, s.noise->b2, s.noise->blocks, s.noise->dist, s.seed);
        s.schedule = std::move(blocks.schedule);
        s.horizon = s.schedule.horizon();
        if (doc.contains("horizon")) s.horizon = std::min<long>(s.horizon, doc.at("horizon").get<long>());
        s.validate();
        return s;
    }

    if (!doc.contains("schedule")) throw InvalidScenario("scenario is missing \"schedule\"");
    // Default horizon: the sequence length for explicit schedules, 1000 for
    // generated families; capped at 1e6 either way.
    long horizon = 1000;
    if (doc.contains("horizon")) {
        horizon = doc.at("horizon").get<long>();
        if (horizon < 1 || horizon > 1000000) throw InvalidScenario("horizon must lie in [1, 1e6]");
    } else if (doc.at("schedule").is_object() && doc.at("schedule").value("kind", "") == "sequence" &&
               doc.at("schedule").contains("A_list")) {
        horizon = std::min<long>(1000000, static_cast<long>(doc.at("schedule").at("A_list").size()));
    }
    s.schedule = parse_schedule(doc.at("schedule"), s.n, horizon);
    s.horizon = std::min<long>(horizon, s.schedule.horizon());
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open scenario file " + path);
    json doc = json::parse(in);  // throws json::parse_error on malformed input
    return parse_scenario(doc);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

json vertices_1based(const std::vector<int>& vs) {
    json arr = json::array();
    for (int v : vs) arr.push_back(v + 1);
    return arr;
}

}  // namespace

json to_json(const CertificateReport& report) {
    json witnesses = json::object();
    for (const auto& [name, value] : report.witnesses)
        witnesses[name] = std::isfinite(value) ? json(value) : json(format_double(value));
    json out = {{"verdict", to_string(report.verdict)},
                {"fired_rule", report.fired_rule},
                {"witnesses", witnesses},
                {"notes", report.notes}};
    out["witnesses"]["anchors"] = vertices_1based(report.anchor_set);
    return out;
}

json to_json(const AnchorReport& report) {
    json out = {{"anchors", vertices_1based(report.anchors)},
                {"defective", vertices_1based(report.defective)},
                {"overlearners", vertices_1based(report.overlearners)},
                {"condensely_anchored", report.condensely_anchored}};
    if (!report.witness_walks.empty()) {
        json walks = json::array();
        for (const auto& walk : report.witness_walks)
            walks.push_back(walk ? vertices_1based(*walk) : json());
        out["witness_walks"] = walks;
    }
    return out;
}

json to_json(const SmallGainReport& report) {
    json out = {{"lambda_sup", report.lambda_sup},
                {"K", std::isfinite(report.k) ? json(report.k) : json(format_double(report.k))},
                {"c", std::isfinite(report.c) ? json(report.c) : json(format_double(report.c))},
                {"holds", report.holds},
                {"rho_max", report.rho_max},
                {"notes", report.notes}};
    if (report.lambda_certified) out["lambda_certified"] = *report.lambda_certified;
    return out;
}

std::string trajectory_csv(const Trajectory& traj, int n) {
    std::ostringstream os;
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    os << ",err_inf,bound\n";
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        os << t;
        for (int i = 0; i < n; ++i) os << "," << format_double(traj.states[t][i]);
        os << "," << format_double(traj.errors[t]) << ",";
        if (traj.has_bound(static_cast<long>(t))) os << format_double(traj.bounds[t]);
        os << "\n";
    }
    return os.str();
}

std::string ensemble_csv(const Ensemble& ens, const std::vector<double>& w1_profile) {
    std::ostringstream os;
    os << "t,mean_err,max_err,w1_vs_prev_checkpoint\n";
    for (long t = 0; t <= ens.horizon; ++t) {
        os << t << "," << format_double(ens.mean_err[t]) << "," << format_double(ens.max_err[t]) << ",";
        for (std::size_t c = 1; c < ens.checkpoints.size(); ++c) {
            if (ens.checkpoints[c] == t && c - 1 < w1_profile.size()) {
                os << format_double(w1_profile[c - 1]);
                break;
            }
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace avglearn
