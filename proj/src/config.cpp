#include "hpg/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "hpg/errors.hpp"

namespace hpg {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::train: return "train";
        case ExperimentKind::tail_trace: return "tail_trace";
        case ExperimentKind::exit_time: return "exit_time";
        case ExperimentKind::transition: return "transition";
        case ExperimentKind::occupancy: return "occupancy";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "train") return ExperimentKind::train;
    if (name == "tail_trace") return ExperimentKind::tail_trace;
    if (name == "exit_time") return ExperimentKind::exit_time;
    if (name == "transition") return ExperimentKind::transition;
    if (name == "occupancy") return ExperimentKind::occupancy;
    throw ConfigError("kind", "unknown experiment kind '" + name +
                                  "' (expected train, tail_trace, exit_time, transition or occupancy)");
}

bool trains_policy(ExperimentKind kind) {
    return kind == ExperimentKind::train || kind == ExperimentKind::tail_trace || kind == ExperimentKind::occupancy;
}

namespace {

// Reads one JSON object, remembering the dotted path and which keys were used.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return node_.contains(key); }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!node_.contains(key)) return;
        used_.insert(key);
        convert(node_.at(key), field(key), out);
    }

    template <class T>
    void require(const std::string& key, T& out) {
        if (!node_.contains(key)) throw ConfigError(field(key), "missing required field");
        get(key, out);
    }

    Reader child(const std::string& key) {
        used_.insert(key);
        return Reader(node_.at(key), field(key));
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
        }
    }

private:
    static void convert(const json& v, const std::string& f, double& out) {
        if (!v.is_number()) throw ConfigError(f, "expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ConfigError(f, "expected a finite number");
    }
    static void convert(const json& v, const std::string& f, bool& out) {
        if (!v.is_boolean()) throw ConfigError(f, "expected true or false");
        out = v.get<bool>();
    }
    static void convert(const json& v, const std::string& f, int& out) {
        if (!v.is_number_integer()) throw ConfigError(f, "expected an integer");
        out = v.get<int>();
    }
    // parsed documents store non-negative integers as unsigned; programmatic ones may not
    static bool non_negative_integer(const json& v) {
        return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    }
    static void convert(const json& v, const std::string& f, unsigned& out) {
        if (!non_negative_integer(v)) throw ConfigError(f, "expected a non-negative integer");
        out = v.get<unsigned>();
    }
    static void convert(const json& v, const std::string& f, std::size_t& out) {
        if (!non_negative_integer(v)) throw ConfigError(f, "expected a non-negative integer");
        out = v.get<std::size_t>();
    }
    static void convert(const json& v, const std::string& f, std::string& out) {
        if (!v.is_string()) throw ConfigError(f, "expected a string");
        out = v.get<std::string>();
    }
    template <class T>
    static void convert(const json& v, const std::string& f, std::optional<T>& out) {
        if (v.is_null()) {
            out.reset();
            return;
        }
        T tmp{};
        convert(v, f, tmp);
        out = tmp;
    }
    template <class T>
    static void convert(const json& v, const std::string& f, std::vector<T>& out) {
        if (v.is_number()) {
            // a scalar is accepted as a one-element list
            T tmp{};
            convert(v, f, tmp);
            out = {tmp};
            return;
        }
        if (!v.is_array()) throw ConfigError(f, "expected a list");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            T tmp{};
            convert(v[i], f + "[" + std::to_string(i) + "]", tmp);
            out.push_back(tmp);
        }
    }

    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

void read_env(Reader r, EnvBlock& b) {
    r.get("name", b.name);
    r.get("dt", b.dt);
    r.get("goal_tolerance", b.goal_tolerance);
    r.get("horizon_cap", b.horizon_cap);
    r.get("init", b.init);
    r.get("action_limit", b.action_limit);
    r.finish();
}

void read_policy(Reader r, PolicyBlock& b) {
    std::string family = to_string(b.family);
    r.get("family", family);
    try {
        b.family = family_from_string(family);
    } catch (const std::exception& e) {
        throw ConfigError(r.field("family"), e.what());
    }
    r.get("alpha", b.alpha);
    r.get("variable_scale", b.variable_scale);
    if (r.has("features")) {
        Reader f = r.child("features");
        f.get("kind", b.features.kind);
        f.get("degree", b.features.degree);
        f.get("centers", b.features.centers);
        f.get("width", b.features.width);
        f.finish();
    }
    r.get("initial_x", b.initial_x);
    r.get("initial_y", b.initial_y);
    r.get("sigma", b.sigma);
    r.get("delta0", b.delta0);
    r.finish();
}

void read_train(Reader r, TrainBlock& b, bool gamma_required) {
    if (gamma_required) {
        r.require("gamma", b.gamma);
    } else {
        r.get("gamma", b.gamma);
    }
    r.get("episodes", b.episodes);
    r.get("batch", b.batch);
    if (r.has("schedule")) {
        Reader s = r.child("schedule");
        std::string kind = to_string(b.schedule.kind);
        s.get("kind", kind);
        try {
            b.schedule.kind = schedule_kind_from_string(kind);
        } catch (const std::exception& e) {
            throw ConfigError(s.field("kind"), e.what());
        }
        s.get("eta", b.schedule.eta);
        s.get("beta", b.schedule.beta);
        s.get("eta0", b.schedule.eta0);
        s.get("eta_min", b.schedule.eta_min);
        s.finish();
    }
    r.get("eval_window", b.eval_window);
    r.get("grad_clip", b.grad_clip);
    r.finish();
}

void read_metastability(Reader r, MetastabilityBlock& b, bool landscape_required) {
    if (r.has("landscape")) {
        Reader l = r.child("landscape");
        if (landscape_required) {
            l.require("kind", b.landscape.kind);
        } else {
            l.get("kind", b.landscape.kind);
        }
        l.get("curvature", b.landscape.curvature);
        l.get("m1", b.landscape.m1);
        l.get("m2", b.landscape.m2);
        l.get("depth", b.landscape.depth);
        l.get("symmetric", b.landscape.symmetric);
        l.get("critical_points", b.landscape.critical_points);
        l.get("scale", b.landscape.scale);
        l.get("box_margin", b.landscape.box_margin);
        l.get("transverse_curvature", b.landscape.transverse_curvature);
        l.get("direction", b.landscape.direction);
        l.finish();
    } else if (landscape_required) {
        throw ConfigError(r.field("landscape.kind"), "missing required field");
    }
    r.get("alphas", b.alphas);
    r.get("eta", b.eta);
    r.get("epsilons", b.epsilons);
    r.get("epsilon", b.epsilon);
    r.get("a", b.a);
    r.get("runs", b.runs);
    std::size_t cap = b.cap;
    r.get("cap", cap);
    b.cap = cap;
    r.get("well", b.well);
    r.get("start_well", b.start_well);
    r.get("tube_halfwidth", b.tube_halfwidth);
    r.finish();
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("seeds", "seeds must be distinct");
    }
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    if (workers == 0) throw ConfigError("workers", "must be at least 1");

    if (trains_policy(kind)) {
        if (env.name != "pmc" && env.name != "mario") throw ConfigError("env.name", "expected pmc or mario");
        if (!(env.dt > 0.0)) throw ConfigError("env.dt", "must be positive");
        if (!(env.goal_tolerance >= 0.0)) throw ConfigError("env.goal_tolerance", "must be non-negative");
        if (env.horizon_cap == 0) throw ConfigError("env.horizon_cap", "must be at least 1");
        if (env.action_limit && !(*env.action_limit > 0.0)) throw ConfigError("env.action_limit", "must be positive");
        if (env.name == "pmc" && !(env.init >= PathologicalMountainCar::kLower && env.init <= PathologicalMountainCar::kUpper)) {
            throw ConfigError("env.init", "must lie in [-4.0, 3.709]");
        }
        try {
            make_policy(policy);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("policy", e.what());
        }
        if (!policy.initial_x.empty()) {
            const std::size_t dim = make_policy(policy).features().dim();
            if (policy.initial_x.size() != dim) {
                throw ConfigError("policy.initial_x", "has " + std::to_string(policy.initial_x.size()) +
                                                          " entries, feature map dimension is " + std::to_string(dim));
            }
        }
        if (policy.sigma && policy.initial_y) throw ConfigError("policy.sigma", "set either sigma or initial_y, not both");
        if (policy.sigma && !(*policy.sigma > 0.0)) throw ConfigError("policy.sigma", "must be positive");
        if (!(train.gamma >= 0.0 && train.gamma < 1.0)) throw ConfigError("train.gamma", "must lie in [0, 1)");
        if (train.episodes == 0) throw ConfigError("train.episodes", "must be at least 1");
        if (train.batch == 0) throw ConfigError("train.batch", "must be at least 1");
        if (train.eval_window == 0) throw ConfigError("train.eval_window", "must be at least 1");
        if (train.grad_clip && !(*train.grad_clip > 0.0)) throw ConfigError("train.grad_clip", "must be positive");
        try {
            make_train_config(train, 0).schedule.validate();
        } catch (const std::exception& e) {
            throw ConfigError("train.schedule", e.what());
        }
        if (kind == ExperimentKind::tail_trace && tail.window == 0) throw ConfigError("tail.window", "must be at least 1");
        if (kind == ExperimentKind::occupancy) {
            if (occupancy.bins == 0) throw ConfigError("occupancy.bins", "must be at least 1");
            if (occupancy.eval_episodes == 0) throw ConfigError("occupancy.eval_episodes", "must be at least 1");
        }
        return;
    }

    const auto& m = metastability;
    Landscape landscape;
    try {
        landscape = make_landscape(m.landscape);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("metastability.landscape", e.what());
    }
    if (m.alphas.empty()) throw ConfigError("metastability.alphas", "at least one alpha is required");
    for (double alpha : m.alphas) {
        if (!(alpha >= 1.0 && alpha <= 2.0)) throw ConfigError("metastability.alphas", "each alpha must lie in [1, 2]");
    }
    if (m.a.size() != 1 && m.a.size() != m.alphas.size()) {
        throw ConfigError("metastability.a", "give one radius or one per alpha");
    }
    for (double a : m.a) {
        if (!(a > 0.0)) throw ConfigError("metastability.a", "radii must be positive");
    }
    if (m.runs == 0) throw ConfigError("metastability.runs", "must be at least 1");
    if (m.cap == 0) throw ConfigError("metastability.cap", "must be at least 1");
    if (!(m.eta > 0.0)) throw ConfigError("metastability.eta", "must be positive");
    if (m.eta * landscape.lipschitz_bound() > 2.0) {
        throw ConfigError("metastability.eta", "exceeds the landscape stability limit 2/L = " +
                                                   std::to_string(2.0 / landscape.lipschitz_bound()));
    }
    for (double e : m.epsilons) {
        if (!(e > 0.0)) throw ConfigError("metastability.epsilons", "must be positive");
    }
    if (m.epsilon && !(*m.epsilon > 0.0)) throw ConfigError("metastability.epsilon", "must be positive");
    if (kind == ExperimentKind::exit_time && m.well >= landscape.maxima().size()) {
        throw ConfigError("metastability.well", "landscape has only " + std::to_string(landscape.maxima().size()) + " wells");
    }
    if (kind == ExperimentKind::transition) {
        if (landscape.maxima().size() < 2) throw ConfigError("metastability.landscape", "transition needs at least two wells");
        if (m.start_well >= landscape.maxima().size()) {
            throw ConfigError("metastability.start_well",
                              "landscape has only " + std::to_string(landscape.maxima().size()) + " wells");
        }
    }
}

ExperimentConfig parse_config(const json& doc, std::optional<ExperimentKind> implied_kind) {
    Reader r(doc, "");
    ExperimentConfig c;
    if (r.has("kind")) {
        std::string kind;
        r.get("kind", kind);
        c.kind = experiment_kind_from_string(kind);
        if (implied_kind && *implied_kind != c.kind) {
            throw ConfigError("kind", "config declares '" + kind + "' but the subcommand runs '" +
                                          to_string(*implied_kind) + "'");
        }
    } else if (implied_kind) {
        c.kind = *implied_kind;
    } else {
        throw ConfigError("kind", "missing required field");
    }

    const bool trains = trains_policy(c.kind);
    if (r.has("env")) read_env(r.child("env"), c.env);
    if (r.has("policy")) read_policy(r.child("policy"), c.policy);
    if (r.has("train")) {
        read_train(r.child("train"), c.train, trains);
    } else if (trains) {
        throw ConfigError("train.gamma", "missing required field");
    }
    if (r.has("metastability")) {
        read_metastability(r.child("metastability"), c.metastability, !trains);
    } else if (!trains) {
        throw ConfigError("metastability.landscape.kind", "missing required field");
    }
    if (r.has("tail")) {
        Reader t = r.child("tail");
        t.get("window", c.tail.window);
        t.finish();
    }
    if (r.has("occupancy")) {
        Reader o = r.child("occupancy");
        o.get("bins", c.occupancy.bins);
        o.get("eval_episodes", c.occupancy.eval_episodes);
        o.finish();
    }
    if (r.has("seeds")) {
        std::vector<std::size_t> seeds;
        r.get("seeds", seeds);
        c.seeds.assign(seeds.begin(), seeds.end());
    }
    r.get("output_dir", c.output_dir);
    r.get("workers", c.workers);
    r.finish();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> implied_kind) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("malformed JSON in '") + path + "': " + e.what());
    }
    return parse_config(doc, implied_kind);
}

json serialize_config(const ExperimentConfig& c) {
    json j;
    j["kind"] = to_string(c.kind);
    j["env"] = {{"name", c.env.name},
                {"dt", c.env.dt},
                {"goal_tolerance", c.env.goal_tolerance},
                {"horizon_cap", c.env.horizon_cap},
                {"init", c.env.init},
                {"action_limit", opt(c.env.action_limit)}};
    j["policy"] = {{"family", to_string(c.policy.family)},
                   {"alpha", c.policy.alpha},
                   {"variable_scale", c.policy.variable_scale},
                   {"features",
                    {{"kind", c.policy.features.kind},
                     {"degree", c.policy.features.degree},
                     {"centers", c.policy.features.centers},
                     {"width", c.policy.features.width}}},
                   {"initial_x", c.policy.initial_x},
                   {"initial_y", opt(c.policy.initial_y)},
                   {"sigma", opt(c.policy.sigma)},
                   {"delta0", c.policy.delta0}};
    j["train"] = {{"gamma", c.train.gamma},
                  {"episodes", c.train.episodes},
                  {"batch", c.train.batch},
                  {"schedule",
                   {{"kind", to_string(c.train.schedule.kind)},
                    {"eta", c.train.schedule.eta},
                    {"beta", c.train.schedule.beta},
                    {"eta0", c.train.schedule.eta0},
                    {"eta_min", c.train.schedule.eta_min}}},
                  {"eval_window", c.train.eval_window},
                  {"grad_clip", opt(c.train.grad_clip)}};
    const auto& m = c.metastability;
    j["metastability"] = {{"landscape",
                           {{"kind", m.landscape.kind},
                            {"curvature", m.landscape.curvature},
                            {"m1", m.landscape.m1},
                            {"m2", m.landscape.m2},
                            {"depth", m.landscape.depth},
                            {"symmetric", m.landscape.symmetric},
                            {"critical_points", m.landscape.critical_points},
                            {"scale", m.landscape.scale},
                            {"box_margin", opt(m.landscape.box_margin)},
                            {"transverse_curvature", opt(m.landscape.transverse_curvature)},
                            {"direction", m.landscape.direction}}},
                          {"alphas", m.alphas},
                          {"eta", m.eta},
                          {"epsilons", m.epsilons},
                          {"epsilon", opt(m.epsilon)},
                          {"a", m.a},
                          {"runs", m.runs},
                          {"cap", m.cap},
                          {"well", m.well},
                          {"start_well", m.start_well},
                          {"tube_halfwidth", opt(m.tube_halfwidth)}};
    j["tail"] = {{"window", c.tail.window}};
    j["occupancy"] = {{"bins", c.occupancy.bins}, {"eval_episodes", c.occupancy.eval_episodes}};
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    return j;
}

std::unique_ptr<Environment> make_environment(const EnvBlock& b) {
    if (b.name == "pmc") {
        PmcConfig pc;
        pc.dt = b.dt;
        pc.goal_tolerance = b.goal_tolerance;
        pc.horizon_cap = b.horizon_cap;
        pc.init = b.init;
        if (b.action_limit) pc.action_limit = *b.action_limit;
        return std::make_unique<PathologicalMountainCar>(pc);
    }
    if (b.name == "mario") {
        MarioConfig mc;
        mc.horizon_cap = b.horizon_cap;
        if (b.action_limit) mc.action_limit = *b.action_limit;
        return std::make_unique<Mario1D>(mc);
    }
    throw ConfigError("env.name", "unknown environment '" + b.name + "' (expected pmc or mario)");
}

Policy make_policy(const PolicyBlock& b) {
    PolicyKind kind{b.family, b.alpha, b.variable_scale};
    FeatureMap features = FeatureMap::identity();
    if (b.features.kind == "identity") {
        features = FeatureMap::identity();
    } else if (b.features.kind == "polynomial") {
        features = FeatureMap::polynomial(b.features.degree);
    } else if (b.features.kind == "radial_basis") {
        features = FeatureMap::radial_basis(b.features.centers, b.features.width);
    } else {
        throw ConfigError("policy.features.kind",
                          "unknown feature map '" + b.features.kind + "' (expected identity, polynomial or radial_basis)");
    }
    return Policy(kind, std::move(features), b.delta0);
}

PolicyParams make_initial_params(const PolicyBlock& b, const Policy& policy) {
    std::vector<double> x = b.initial_x;
    if (x.empty()) x.assign(policy.features().dim(), 0.0);
    double y = b.initial_y.value_or(0.0);
    if (b.sigma) y = b.family == Family::gaussian ? 2.0 * std::log(*b.sigma) : std::log(*b.sigma);
    return policy.initial_params(std::move(x), y);
}

TrainConfig make_train_config(const TrainBlock& b, std::uint64_t seed) {
    TrainConfig tc;
    tc.gamma = b.gamma;
    tc.episodes = b.episodes;
    tc.batch = b.batch;
    tc.schedule.kind = b.schedule.kind;
    tc.schedule.eta = b.schedule.eta;
    tc.schedule.beta = b.schedule.beta;
    tc.schedule.eta0 = b.schedule.eta0;
    tc.schedule.eta_min = b.schedule.eta_min;
    tc.seed = seed;
    tc.eval_window = b.eval_window;
    tc.grad_clip = b.grad_clip;
    return tc;
}

Landscape make_landscape(const LandscapeBlock& b) {
    Landscape l;
    if (b.kind == "single_well") {
        l = Landscape::single_well(b.curvature, b.box_margin.value_or(1.0));
    } else if (b.kind == "double_well") {
        l = Landscape::double_well(b.m1, b.m2, b.depth, b.box_margin.value_or(0.5));
    } else if (b.kind == "triple_well") {
        l = Landscape::triple_well(b.symmetric, b.scale);
    } else if (b.kind == "multi_well") {
        l = Landscape::multi_well(b.critical_points, b.scale, b.box_margin.value_or(0.5));
    } else {
        throw ConfigError("metastability.landscape.kind",
                          "unknown landscape '" + b.kind + "' (expected single_well, double_well, triple_well or multi_well)");
    }
    if (b.transverse_curvature) l = l.with_second_dimension(*b.transverse_curvature, b.direction);
    return l;
}

}  // namespace hpg
