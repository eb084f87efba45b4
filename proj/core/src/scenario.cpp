#include "hydrostore/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hydrostore/errors.hpp"

namespace hydrostore {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

double to_double(std::string_view s, std::string_view key, int line) {
    s = trim(s);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ParseError("'" + std::string(key) + "': expected a number, got '" + std::string(s) + "'",
                         line);
    return v;
}

int to_int(std::string_view s, std::string_view key, int line) {
    s = trim(s);
    int v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ParseError("'" + std::string(key) + "': expected an integer, got '" + std::string(s) + "'",
                         line);
    return v;
}

bool to_bool(std::string_view s, std::string_view key, int line) {
    s = trim(s);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ParseError("'" + std::string(key) + "': expected true/false, got '" + std::string(s) + "'",
                     line);
}

std::vector<double> to_doubles(std::string_view s, std::string_view key, int line) {
    std::vector<double> out;
    for (auto item : split_list(s)) out.push_back(to_double(item, key, line));
    return out;
}

std::vector<int> to_ints(std::string_view s, std::string_view key, int line) {
    std::vector<int> out;
    for (auto item : split_list(s)) out.push_back(to_int(item, key, line));
    return out;
}

ProfileKind parse_profile_kind(std::string_view s, int line) {
    if (s == "constant") return ProfileKind::Constant;
    if (s == "ramp") return ProfileKind::Ramp;
    if (s == "gaussian" || s == "gaussian-bump") return ProfileKind::Gaussian;
    if (s == "step") return ProfileKind::Step;
    if (s == "csv") return ProfileKind::Csv;
    throw ParseError("unknown profile '" + std::string(s) +
                         "' (expected constant, ramp, gaussian-bump, step or csv)",
                     line);
}

using Setter = std::function<void(Scenario&, std::string_view value, std::string_view key, int line,
                                  const std::filesystem::path& base_dir)>;

template <typename F>
Setter plain(F f) {
    return [f](Scenario& s, std::string_view v, std::string_view k, int line,
               const std::filesystem::path&) { f(s, v, k, line); };
}

void add_profile_keys(std::map<std::string, Setter>& table, const std::string& prefix,
                      ProfileSpec Scenario::*member) {
    auto num = [&](const char* name, double ProfileSpec::*field) {
        table[prefix + name] = plain([member, field](Scenario& s, std::string_view v, std::string_view k,
                                                     int line) { (s.*member).*field = to_double(v, k, line); });
    };
    table[prefix + "profile"] = plain([member](Scenario& s, std::string_view v, std::string_view,
                                               int line) { (s.*member).kind = parse_profile_kind(v, line); });
    num("value", &ProfileSpec::value);
    num("low", &ProfileSpec::low);
    num("high", &ProfileSpec::high);
    num("base", &ProfileSpec::base);
    num("amplitude", &ProfileSpec::amplitude);
    num("center", &ProfileSpec::center);
    num("center_y", &ProfileSpec::center_y);
    num("width", &ProfileSpec::width);
    num("position", &ProfileSpec::position);
    table[prefix + "file"] = [member](Scenario& s, std::string_view v, std::string_view, int,
                                      const std::filesystem::path& base) {
        std::filesystem::path p{std::string(v)};
        (s.*member).file = p.is_relative() && !base.empty() ? base / p : p;
    };
}

const std::map<std::string, Setter>& key_table() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["grid.dim"] = plain([](Scenario& s, auto v, auto k, int l) { s.grid.dim = to_int(v, k, l); });
        t["grid.cells"] = plain([](Scenario& s, auto v, auto k, int l) { s.grid.cells = to_ints(v, k, l); });
        t["grid.lengths"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.grid.lengths = to_doubles(v, k, l); });
        t["model.mu"] = plain([](Scenario& s, auto v, auto k, int l) { s.model.mu = to_double(v, k, l); });
        t["model.nu"] = plain([](Scenario& s, auto v, auto k, int l) { s.model.nu = to_double(v, k, l); });
        t["model.gamma"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.model.gamma = to_double(v, k, l); });
        t["h.family"] = plain([](Scenario& s, auto v, auto, int l) {
            try {
                s.model.h.family = parse_h_family(v);
            } catch (const ValidationError& err) {
                throw ParseError(err.what(), l);
            }
        });
        t["h.scale"] = plain([](Scenario& s, auto v, auto k, int l) { s.model.h.scale = to_double(v, k, l); });
        t["h.c_h"] = plain([](Scenario& s, auto v, auto k, int l) { s.model.h.c_h = to_double(v, k, l); });
        t["stepper.dt"] = plain([](Scenario& s, auto v, auto k, int l) { s.stepper.dt = to_double(v, k, l); });
        t["stepper.dt_min"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.stepper.dt_min = to_double(v, k, l); });
        t["stepper.tol_couple"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.stepper.tol_couple = to_double(v, k, l); });
        t["stepper.tol_newton"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.stepper.tol_newton = to_double(v, k, l); });
        t["stepper.tol_linear"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.stepper.tol_linear = to_double(v, k, l); });
        t["stepper.max_outer"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.stepper.max_outer = to_int(v, k, l); });
        t["stepper.max_newton"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.stepper.max_newton = to_int(v, k, l); });
        t["stepper.relaxation"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.stepper.relaxation = to_double(v, k, l); });
        t["init.n"] = plain([](Scenario& s, auto v, auto k, int l) { s.smoothing_n = to_int(v, k, l); });
        t["init.positive_theta"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.positive_theta = to_bool(v, k, l); });
        add_profile_keys(t, "init.theta.", &Scenario::theta0);
        add_profile_keys(t, "init.chi.", &Scenario::chi0);
        add_profile_keys(t, "init.u.", &Scenario::u0);
        t["run.t_end"] = plain([](Scenario& s, auto v, auto k, int l) { s.t_end = to_double(v, k, l); });
        t["run.output_every"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.output_every = to_int(v, k, l); });
        t["run.out_dir"] = plain([](Scenario& s, auto v, auto, int) { s.out_dir = std::string(v); });
        t["run.mode"] = plain([](Scenario& s, auto v, auto, int l) {
            try {
                s.mode = parse_mode(v);
            } catch (const ValidationError& err) {
                throw ParseError(err.what(), l);
            }
        });
        t["steady.deadband"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.steady_deadband = to_double(v, k, l); });
        t["decay.gammas"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.decay_gammas = to_doubles(v, k, l); });
        t["conv.levels"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.convergence_levels = to_int(v, k, l); });
        t["conv.nus"] =
            plain([](Scenario& s, auto v, auto k, int l) { s.convergence_nus = to_doubles(v, k, l); });
        return t;
    }();
    return table;
}

void apply(Scenario& s, std::string_view key, std::string_view value, int line,
           const std::filesystem::path& base_dir) {
    const auto& table = key_table();
    const auto it = table.find(std::string(key));
    if (it == table.end()) throw ParseError("unknown key '" + std::string(key) + "'", line);
    it->second(s, value, key, line, base_dir);
}

}  // namespace

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::Run: return "run";
        case Mode::SteadyCheck: return "steady-check";
        case Mode::DecayStudy: return "decay-study";
        case Mode::ConvergenceStudy: return "convergence-study";
    }
    return "unknown";
}

Mode parse_mode(std::string_view name) {
    if (name == "run") return Mode::Run;
    if (name == "steady-check") return Mode::SteadyCheck;
    if (name == "decay-study") return Mode::DecayStudy;
    if (name == "convergence-study") return Mode::ConvergenceStudy;
    throw ValidationError("unknown mode '" + std::string(name) +
                          "' (expected run, steady-check, decay-study or convergence-study)");
}

GridPtr GridSpec::build() const {
    const auto n = static_cast<std::size_t>(dim);
    if (dim != 1 && dim != 2) throw ValidationError("grid.dim must be 1 or 2");
    if (cells.size() != n) throw ValidationError("grid.cells needs one entry per axis");
    if (lengths.size() != n) throw ValidationError("grid.lengths needs one entry per axis");
    if (dim == 1) return Grid::line(cells[0], lengths[0]);
    return Grid::rectangle(cells[0], cells[1], lengths[0], lengths[1]);
}

Field evaluate_profile(const ProfileSpec& p, const GridPtr& grid) {
    const double lx = grid->length(0);
    switch (p.kind) {
        case ProfileKind::Constant: return Field::constant(grid, p.value);
        case ProfileKind::Ramp:
            return Field::from_function(grid, [&](double x, double) { return p.low + (p.high - p.low) * x / lx; });
        case ProfileKind::Gaussian: {
            const bool two_d = grid->dim() == 2;
            return Field::from_function(grid, [&](double x, double y) {
                const double dx = x - p.center;
                const double dy = two_d ? y - p.center_y : 0.0;
                return p.base + p.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * p.width * p.width));
            });
        }
        case ProfileKind::Step:
            return Field::from_function(grid, [&](double x, double) { return x < p.position ? p.low : p.high; });
        case ProfileKind::Csv: {
            std::ifstream in(p.file);
            if (!in) throw IoError("cannot open profile file " + p.file.string());
            std::vector<double> values;
            std::string line;
            int line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                const auto body = trim(std::string_view(line).substr(0, line.find('#')));
                if (body.empty()) continue;
                for (auto item : split_list(body)) values.push_back(to_double(item, p.file.string(), line_no));
            }
            if (static_cast<Index>(values.size()) != grid->node_count())
                throw ValidationError("profile file " + p.file.string() + " has " +
                                      std::to_string(values.size()) + " values, grid has " +
                                      std::to_string(grid->node_count()) + " nodes");
            return Field(grid, Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
        }
    }
    throw ValidationError("unknown profile kind");
}

long Scenario::step_count() const { return std::lround(t_end / stepper.dt); }

InitialData Scenario::initial_data() const {
    const GridPtr g = grid.build();
    return {evaluate_profile(theta0, g), evaluate_profile(chi0, g), evaluate_profile(u0, g)};
}

State Scenario::initial_state() const {
    return build_initial_state(initial_data(), smoothing_n, model.h, positive_theta);
}

void validate(const Scenario& s) {
    validate(s.model);
    validate(s.stepper);
    s.grid.build();
    if (!(s.t_end > 0.0)) throw ValidationError("run.t_end > 0 violated");
    if (s.smoothing_n < 1) throw ValidationError("init.n >= 1 violated");
    if (s.output_every < 1) throw ValidationError("run.output_every >= 1 violated");
    const long steps = s.step_count();
    if (steps < 1 || std::abs(static_cast<double>(steps) * s.stepper.dt - s.t_end) > 1e-9 * s.t_end)
        throw ValidationError("run.t_end must be an integer multiple of stepper.dt");
    if (steps % s.output_every != 0)
        throw ValidationError("run.output_every must divide the number of steps (" +
                              std::to_string(steps) + ")");
    for (const ProfileSpec* p : {&s.theta0, &s.chi0, &s.u0})
        if (p->kind == ProfileKind::Gaussian && !(p->width > 0.0))
            throw ValidationError("gaussian profile width > 0 violated");
    if (!(s.steady_deadband >= 0.0)) throw ValidationError("steady.deadband >= 0 violated");

    switch (s.mode) {
        case Mode::SteadyCheck:
            if (s.model.gamma != 0.0)
                throw ValidationError("steady-check requires gamma = 0 (equilibria are classified for the "
                                      "isolated system)");
            break;
        case Mode::DecayStudy:
            if (!(s.model.gamma > 0.0))
                throw ValidationError("decay-study requires gamma > 0: the V' norm of u decays only "
                                      "through a permeable boundary");
            if (s.decay_gammas.empty()) throw ValidationError("decay.gammas must not be empty");
            for (double g : s.decay_gammas)
                if (!(g > 0.0)) throw ValidationError("decay-study requires every decay.gammas entry > 0");
            break;
        case Mode::ConvergenceStudy:
            if (s.convergence_levels < 3) throw ValidationError("conv.levels >= 3 violated");
            if (s.convergence_nus.size() < 2) throw ValidationError("conv.nus needs at least two values");
            for (double nu : s.convergence_nus)
                if (!(nu >= 0.0)) throw ValidationError("conv.nus entries must be >= 0");
            break;
        case Mode::Run: break;
    }
}

Scenario parse_scenario(std::string_view text, const std::vector<std::string>& overrides,
                        const std::filesystem::path& base_dir) {
    Scenario s;
    std::map<std::string, int, std::less<>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto body = trim(raw.substr(0, raw.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
        const auto key = trim(body.substr(0, eq));
        const auto value = trim(body.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no);
        if (value.empty()) throw ParseError("empty value for '" + std::string(key) + "'", line_no);
        if (auto it = seen.find(key); it != seen.end())
            throw ParseError("duplicate key '" + std::string(key) + "' (first set on line " +
                                 std::to_string(it->second) + ")",
                             line_no);
        seen.emplace(std::string(key), line_no);
        apply(s, key, value, line_no, base_dir);
    }

    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) throw ParseError("override '" + ov + "' is not key=value", 0);
        const auto key = trim(std::string_view(ov).substr(0, eq));
        const auto value = trim(std::string_view(ov).substr(eq + 1));
        try {
            apply(s, key, value, 0, base_dir);
        } catch (const ParseError& err) {
            throw ParseError(std::string("override: ") + err.what(), 0);
        }
    }

    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), overrides, path.parent_path());
}

}  // namespace hydrostore
