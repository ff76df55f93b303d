#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace cfrelax::cli {

using json = nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream os;
  os << issues.size() << " problem(s) in config";
  for (const auto& issue : issues) os << "\n  " << issue;
  return os.str();
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string element(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Walks a JSON document, collecting every problem instead of stopping at the
// first. Accessors return nullopt after recording an issue.
class Reader {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& message) {
    issues.push_back((path.empty() ? "<root>" : path) + ": " + message);
  }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void allow_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    for (const auto& [key, value] : obj.items())
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(child(path, key), "unknown field");
  }

  const json* find(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  const json* require(const json& obj, const std::string& path, const std::string& key) {
    const json* v = find(obj, key);
    if (!v) fail(child(path, key), "missing");
    return v;
  }

  std::optional<double> number(const json& v, const std::string& path) {
    if (!v.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return x;
  }

  std::optional<double> number(const json& obj, const std::string& path, const std::string& key,
                               std::optional<double> fallback = std::nullopt) {
    const json* v = fallback ? find(obj, key) : require(obj, path, key);
    if (!v) return fallback;
    return number(*v, child(path, key));
  }

  std::optional<long long> integer(const json& obj, const std::string& path, const std::string& key,
                                   std::optional<long long> fallback = std::nullopt) {
    const json* v = fallback ? find(obj, key) : require(obj, path, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      fail(child(path, key), "expected an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<std::string> text(const json& obj, const std::string& path, const std::string& key,
                                  std::optional<std::string> fallback = std::nullopt) {
    const json* v = fallback ? find(obj, key) : require(obj, path, key);
    if (!v) return fallback;
    if (!v->is_string()) {
      fail(child(path, key), "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const json& obj, const std::string& path, const std::string& key, bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      fail(child(path, key), "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<Vector> vector(const json& v, const std::string& path, std::optional<std::size_t> length = {}) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    Vector out;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto x = number(v[i], element(path, i));
      ok = ok && x.has_value();
      out.push_back(x.value_or(0.0));
    }
    if (length && out.size() != *length) {
      fail(path, "expected " + std::to_string(*length) + " entries, got " + std::to_string(out.size()));
      return std::nullopt;
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<Vector> vector(const json& obj, const std::string& path, const std::string& key,
                               std::optional<std::size_t> length = {}, std::optional<Vector> fallback = {}) {
    const json* v = fallback ? find(obj, key) : require(obj, path, key);
    if (!v) return fallback;
    return vector(*v, child(path, key), length);
  }

  template <class T>
  std::optional<T> guarded(const std::string& path, const std::function<T()>& make) {
    try {
      return make();
    } catch (const Error& e) {
      fail(path, e.what());
      return std::nullopt;
    }
  }
};

std::optional<double> positive(Reader& r, std::optional<double> v, const std::string& path) {
  if (v && !(*v > 0.0)) {
    r.fail(path, "must be > 0");
    return std::nullopt;
  }
  return v;
}

std::optional<double> nonnegative(Reader& r, std::optional<double> v, const std::string& path) {
  if (v && !(*v >= 0.0)) {
    r.fail(path, "must be >= 0");
    return std::nullopt;
  }
  return v;
}

// ---- model -----------------------------------------------------------------

std::optional<ModelSpec> read_model(Reader& r, const json& j, const std::string& path) {
  if (!r.object(j, path)) return std::nullopt;
  const auto type = r.text(j, path, "type");
  if (!type) return std::nullopt;
  if (*type == "advection") {
    r.allow_keys(j, path, {"type", "speeds"});
    auto speeds = r.vector(j, path, "speeds");
    if (speeds && (speeds->empty() || speeds->size() > 2)) {
      r.fail(child(path, "speeds"), "one speed per direction, 1 or 2 directions");
      return std::nullopt;
    }
    if (!speeds) return std::nullopt;
    return model::Advection{*speeds};
  }
  if (*type == "wave_1d") {
    r.allow_keys(j, path, {"type", "mu"});
    const auto mu = positive(r, r.number(j, path, "mu"), child(path, "mu"));
    if (!mu) return std::nullopt;
    return model::Wave1D{*mu};
  }
  if (*type == "elastoplastic_1d") {
    r.allow_keys(j, path, {"type", "mu", "sigma_y"});
    const auto mu = positive(r, r.number(j, path, "mu"), child(path, "mu"));
    const auto sy = positive(r, r.number(j, path, "sigma_y"), child(path, "sigma_y"));
    if (!mu || !sy) return std::nullopt;
    return model::ElastoPlastic1D{*mu, *sy};
  }
  if (*type == "custom") {
    r.allow_keys(j, path, {"type", "matrices"});
    const json* ms = r.require(j, path, "matrices");
    if (!ms) return std::nullopt;
    const std::string mpath = child(path, "matrices");
    if (!ms->is_array() || ms->empty() || ms->size() > 2) {
      r.fail(mpath, "expected 1 or 2 square matrices");
      return std::nullopt;
    }
    model::Custom custom;
    bool ok = true;
    for (std::size_t d = 0; d < ms->size(); ++d) {
      const auto& rows = (*ms)[d];
      const std::string dpath = element(mpath, d);
      if (!rows.is_array() || rows.empty()) {
        r.fail(dpath, "expected a nonempty array of rows");
        ok = false;
        continue;
      }
      const std::size_t m = rows.size();
      std::vector<double> entries;
      for (std::size_t i = 0; i < m; ++i) {
        const auto row = r.vector(rows[i], element(dpath, i), m);
        if (!row) {
          ok = false;
          break;
        }
        entries.insert(entries.end(), row->begin(), row->end());
      }
      if (ok) custom.matrices.emplace_back(m, m, std::move(entries));
    }
    if (!ok) return std::nullopt;
    if (custom.matrices.size() == 2 && custom.matrices[0].rows() != custom.matrices[1].rows()) {
      r.fail(mpath, "matrices differ in size");
      return std::nullopt;
    }
    return custom;
  }
  r.fail(child(path, "type"), "unknown model '" + *type + "'");
  return std::nullopt;
}

std::size_t state_dim(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, model::Advection>) return 1;
        else if constexpr (std::is_same_v<T, model::Custom>) return m.matrices.front().rows();
        else return 2;
      },
      spec);
}

int space_dim(const ModelSpec& spec) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, model::Advection>) return static_cast<int>(m.speeds.size());
        else if constexpr (std::is_same_v<T, model::Custom>) return static_cast<int>(m.matrices.size());
        else return 1;
      },
      spec);
}

// ---- constraint ------------------------------------------------------------

std::optional<ConvexSet> read_set(Reader& r, const json& j, const std::string& path, std::size_t dim,
                                  const std::optional<Vector>& inherited_anchor) {
  if (!r.object(j, path)) return std::nullopt;
  const auto type = r.text(j, path, "type");
  if (!type) return std::nullopt;

  SetOptions options;
  options.anchor = r.vector(j, path, "anchor", dim, inherited_anchor ? inherited_anchor : Vector(dim, 0.0));
  const auto empty = r.boolean(j, path, "allow_empty_interior", false);
  if (!options.anchor || !empty) return std::nullopt;
  options.allow_empty_interior = *empty;

  auto build_set = [&](const std::function<ConvexSet()>& make) { return r.guarded<ConvexSet>(path, make); };

  if (*type == "ball") {
    r.allow_keys(j, path, {"type", "anchor", "allow_empty_interior", "center", "radius"});
    const auto center = r.vector(j, path, "center", dim, Vector(dim, 0.0));
    const auto radius = r.number(j, path, "radius");
    if (!center || !radius) return std::nullopt;
    return build_set([&] { return ConvexSet::ball(*center, *radius, options); });
  }
  if (*type == "box") {
    r.allow_keys(j, path, {"type", "anchor", "allow_empty_interior", "lo", "hi"});
    const auto lo = r.vector(j, path, "lo", dim);
    const auto hi = r.vector(j, path, "hi", dim);
    if (!lo || !hi) return std::nullopt;
    return build_set([&] { return ConvexSet::box(*lo, *hi, options); });
  }
  if (*type == "half_space") {
    r.allow_keys(j, path, {"type", "anchor", "allow_empty_interior", "normal", "offset"});
    const auto normal = r.vector(j, path, "normal", dim);
    const auto offset = r.number(j, path, "offset");
    if (!normal || !offset) return std::nullopt;
    return build_set([&] { return ConvexSet::half_space(*normal, *offset, options); });
  }
  if (*type == "slab") {
    r.allow_keys(j, path, {"type", "anchor", "allow_empty_interior", "axis", "lo", "hi"});
    const auto axis = r.integer(j, path, "axis", dim == 1 ? std::optional<long long>(1) : std::nullopt);
    const auto lo = r.number(j, path, "lo");
    const auto hi = r.number(j, path, "hi");
    if (!axis || !lo || !hi) return std::nullopt;
    if (*axis < 1 || static_cast<std::size_t>(*axis) > dim) {
      r.fail(child(path, "axis"), "must lie in 1.." + std::to_string(dim));
      return std::nullopt;
    }
    return build_set([&] { return ConvexSet::slab(dim, static_cast<std::size_t>(*axis - 1), *lo, *hi, options); });
  }
  if (*type == "cylinder") {
    r.allow_keys(j, path, {"type", "anchor", "allow_empty_interior", "indices", "inner"});
    const json* idx = r.require(j, path, "indices");
    const json* inner_json = r.require(j, path, "inner");
    if (!idx || !inner_json) return std::nullopt;
    std::vector<std::size_t> indices;
    if (!idx->is_array() || idx->empty()) {
      r.fail(child(path, "indices"), "expected a nonempty array of component indices");
      return std::nullopt;
    }
    for (std::size_t i = 0; i < idx->size(); ++i) {
      const auto& v = (*idx)[i];
      if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > static_cast<long long>(dim)) {
        r.fail(element(child(path, "indices"), i), "must be an integer in 1.." + std::to_string(dim));
        return std::nullopt;
      }
      indices.push_back(static_cast<std::size_t>(v.get<long long>() - 1));
    }
    Vector inner_anchor;
    for (std::size_t i : indices) inner_anchor.push_back((*options.anchor)[i]);
    const auto inner = read_set(r, *inner_json, child(path, "inner"), indices.size(), inner_anchor);
    if (!inner) return std::nullopt;
    return build_set([&] { return ConvexSet::cylinder(dim, indices, *inner, options); });
  }
  if (*type == "intersection") {
    r.allow_keys(j, path, {"type", "anchor", "allow_empty_interior", "members", "tol", "max_iter"});
    const json* ms = r.require(j, path, "members");
    const auto tol = positive(r, r.number(j, path, "tol", kDefaultProjectionTolerance), child(path, "tol"));
    const auto max_iter = r.integer(j, path, "max_iter", static_cast<long long>(kDefaultDykstraMaxIter));
    if (!ms) return std::nullopt;
    if (!ms->is_array() || ms->empty()) {
      r.fail(child(path, "members"), "expected a nonempty array of sets");
      return std::nullopt;
    }
    std::vector<ConvexSet> members;
    bool ok = true;
    for (std::size_t i = 0; i < ms->size(); ++i) {
      auto m = read_set(r, (*ms)[i], element(child(path, "members"), i), dim, options.anchor);
      ok = ok && m.has_value();
      if (m) members.push_back(std::move(*m));
    }
    if (!ok || !tol || !max_iter) return std::nullopt;
    if (*max_iter < 1) {
      r.fail(child(path, "max_iter"), "must be >= 1");
      return std::nullopt;
    }
    return build_set([&] {
      return ConvexSet::intersection(std::move(members), options, *tol, static_cast<std::size_t>(*max_iter));
    });
  }
  r.fail(child(path, "type"), "unknown set '" + *type + "'");
  return std::nullopt;
}

// ---- solver, initial data, checks ------------------------------------------

std::optional<SolverConfig> read_solver(Reader& r, const json& j, const std::string& path) {
  if (!r.object(j, path)) return std::nullopt;
  r.allow_keys(j, path,
               {"epsilon", "eta", "T", "cfl", "scheme", "relaxation", "boundary", "snapshot_times", "record_every",
                "mollifier", "max_dt"});
  SolverConfig cfg;
  const std::size_t before = r.issues.size();
  const auto eps = positive(r, r.number(j, path, "epsilon"), child(path, "epsilon"));
  const auto eta = nonnegative(r, r.number(j, path, "eta", 0.0), child(path, "eta"));
  const auto T = positive(r, r.number(j, path, "T"), child(path, "T"));
  const auto cfl = r.number(j, path, "cfl", 0.9);
  if (cfl && !(*cfl > 0.0 && *cfl <= 1.0)) r.fail(child(path, "cfl"), "must lie in (0, 1]");
  const auto scheme = r.text(j, path, "scheme", std::string("upwind"));
  const auto relax = r.text(j, path, "relaxation", std::string("exact"));
  const auto boundary = r.text(j, path, "boundary", std::string("zero"));
  const auto snaps = r.vector(j, path, "snapshot_times", std::nullopt, Vector{});
  const auto every = r.integer(j, path, "record_every", 1);
  if (every && *every < 1) r.fail(child(path, "record_every"), "must be >= 1");

  if (scheme && *scheme != "upwind" && *scheme != "rusanov")
    r.fail(child(path, "scheme"), "expected 'upwind' or 'rusanov'");
  if (relax && *relax != "exact" && *relax != "implicit_euler")
    r.fail(child(path, "relaxation"), "expected 'exact' or 'implicit_euler'");
  if (boundary && *boundary != "zero" && *boundary != "extrapolate")
    r.fail(child(path, "boundary"), "expected 'zero' or 'extrapolate'");
  if (snaps && T) {
    for (std::size_t i = 0; i < snaps->size(); ++i)
      if (!((*snaps)[i] >= 0.0 && (*snaps)[i] <= *T))
        r.fail(element(child(path, "snapshot_times"), i), "must lie in [0, T]");
  }
  if (const json* m = r.find(j, "mollifier")) {
    if (auto v = nonnegative(r, r.number(*m, child(path, "mollifier")), child(path, "mollifier"))) cfg.mollifier = v;
  }
  if (const json* m = r.find(j, "max_dt")) {
    if (auto v = positive(r, r.number(*m, child(path, "max_dt")), child(path, "max_dt"))) cfg.max_dt = v;
  }
  if (r.issues.size() != before) return std::nullopt;

  cfg.epsilon = *eps;
  cfg.eta = *eta;
  cfg.final_time = *T;
  cfg.cfl = *cfl;
  cfg.scheme = *scheme == "rusanov" ? Scheme::Rusanov : Scheme::Upwind;
  cfg.relaxation = *relax == "implicit_euler" ? RelaxationMethod::ImplicitEuler : RelaxationMethod::Exact;
  cfg.boundary = *boundary == "extrapolate" ? GhostFill::Extrapolate : GhostFill::Zero;
  cfg.snapshot_times = *snaps;
  cfg.record_every = static_cast<int>(*every);
  return cfg;
}

std::optional<InitialPreset> read_initial(Reader& r, const json& j, const std::string& path, std::size_t m,
                                          int dim) {
  if (!r.object(j, path)) return std::nullopt;
  const auto name = r.text(j, path, "preset");
  if (!name) return std::nullopt;
  if (*name == "bump") {
    r.allow_keys(j, path, {"preset", "center", "width", "amplitude"});
    const auto center = r.vector(j, path, "center", static_cast<std::size_t>(dim), Vector(dim, 0.0));
    const auto width = positive(r, r.number(j, path, "width"), child(path, "width"));
    const auto amp = r.vector(j, path, "amplitude", m);
    if (!center || !width || !amp) return std::nullopt;
    preset::Bump b;
    b.center = {(*center)[0], dim == 2 ? (*center)[1] : 0.0};
    b.width = *width;
    b.amplitude = *amp;
    return b;
  }
  if (*name == "riemann") {
    r.allow_keys(j, path, {"preset", "left", "right", "interface", "half_width"});
    const auto left = r.vector(j, path, "left", m);
    const auto right = r.vector(j, path, "right", m);
    const auto iface = r.number(j, path, "interface", 0.0);
    const auto hw = positive(r, r.number(j, path, "half_width"), child(path, "half_width"));
    if (!left || !right || !iface || !hw) return std::nullopt;
    return preset::Riemann{*left, *right, *iface, *hw};
  }
  if (*name == "constant") {
    r.allow_keys(j, path, {"preset", "state"});
    const auto state = r.vector(j, path, "state", m);
    if (!state) return std::nullopt;
    return preset::Constant{*state};
  }
  r.fail(child(path, "preset"), "unknown preset '" + *name + "'");
  return std::nullopt;
}

std::optional<Vector> positive_list(Reader& r, const json& j, const std::string& path, const std::string& key,
                                    bool decreasing) {
  auto v = r.vector(j, path, key);
  if (!v) return std::nullopt;
  const std::string p = child(path, key);
  if (v->empty()) {
    r.fail(p, "must not be empty");
    return std::nullopt;
  }
  for (std::size_t i = 0; i < v->size(); ++i)
    if (!((*v)[i] > 0.0)) {
      r.fail(element(p, i), "must be > 0");
      return std::nullopt;
    }
  if (decreasing)
    for (std::size_t i = 1; i < v->size(); ++i)
      if (!((*v)[i] < (*v)[i - 1])) {
        r.fail(p, "must be strictly decreasing");
        return std::nullopt;
      }
  return v;
}

std::optional<CheckSpec> read_check(Reader& r, const json& j, const std::string& path) {
  if (!r.object(j, path)) return std::nullopt;
  const auto name = r.text(j, path, "check");
  if (!name) return std::nullopt;
  if (*name == "energy") {
    r.allow_keys(j, path, {"check"});
    return check::Energy{};
  }
  if (*name == "entropy") {
    r.allow_keys(j, path, {"check", "bumps", "budget_constant"});
    const auto bumps = r.integer(j, path, "bumps", 5);
    const auto c = positive(r, r.number(j, path, "budget_constant", kEntropyBudgetConstant),
                            child(path, "budget_constant"));
    if (bumps && *bumps < 0) r.fail(child(path, "bumps"), "must be >= 0");
    if (!bumps || *bumps < 0 || !c) return std::nullopt;
    return check::Entropy{static_cast<int>(*bumps), *c};
  }
  if (*name == "contraction") {
    r.allow_keys(j, path, {"check", "shift", "radii", "local_tol"});
    const auto shift = r.integer(j, path, "shift", 1);
    const auto radii = r.vector(j, path, "radii", std::nullopt, Vector{1.0});
    check::Contraction c;
    if (const json* t = r.find(j, "local_tol"))
      c.local_tol = nonnegative(r, r.number(*t, child(path, "local_tol")), child(path, "local_tol"));
    if (!shift || !radii) return std::nullopt;
    c.shift = static_cast<int>(*shift);
    c.radii = *radii;
    return c;
  }
  if (*name == "finite_speed") {
    r.allow_keys(j, path, {"check", "r0"});
    check::FiniteSpeed c;
    if (const json* v = r.find(j, "r0")) c.r0 = positive(r, r.number(*v, child(path, "r0")), child(path, "r0"));
    return c;
  }
  if (*name == "epsilon_study") {
    r.allow_keys(j, path, {"check", "epsilons", "omega"});
    const auto eps = positive_list(r, j, path, "epsilons", true);
    const auto omega = positive(r, r.number(j, path, "omega", 1.0), child(path, "omega"));
    if (eps && eps->size() < 2) r.fail(child(path, "epsilons"), "needs at least two values");
    if (!eps || eps->size() < 2 || !omega) return std::nullopt;
    return check::EpsilonStudy{*eps, *omega};
  }
  if (*name == "eta_study") {
    r.allow_keys(j, path, {"check", "etas", "omega", "final_ratio"});
    const auto etas = positive_list(r, j, path, "etas", true);
    const auto omega = positive(r, r.number(j, path, "omega", 1.0), child(path, "omega"));
    const auto ratio = positive(r, r.number(j, path, "final_ratio", 0.5), child(path, "final_ratio"));
    if (!etas || !omega || !ratio) return std::nullopt;
    return check::EtaStudy{*etas, *omega, *ratio};
  }
  if (*name == "data_study") {
    r.allow_keys(j, path, {"check", "widths"});
    auto widths = r.vector(j, path, "widths");
    if (!widths) return std::nullopt;
    for (std::size_t i = 0; i < widths->size(); ++i)
      if (!((*widths)[i] >= 0.0)) r.fail(element(child(path, "widths"), i), "must be >= 0");
    for (std::size_t i = 1; i < widths->size(); ++i)
      if ((*widths)[i] > (*widths)[i - 1]) r.fail(child(path, "widths"), "must be decreasing");
    if (widths->size() < 2) r.fail(child(path, "widths"), "needs at least two values");
    return check::DataStudy{*widths};
  }
  r.fail(child(path, "check"), "unknown check '" + *name + "'");
  return std::nullopt;
}

// ---- canonical output ------------------------------------------------------

void dump(const json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {  // std::map: keys sorted
        if (!first) out += ",\n";
        first = false;
        out += inner + json(key).dump() + ": ";
        dump(value, out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], out, indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

json vec(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json set_to_json(const ConvexSet& set) {
  json j;
  j["anchor"] = vec(set.anchor());
  j["allow_empty_interior"] = set.allows_empty_interior();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) {
          j["type"] = "ball";
          j["center"] = vec(s.center);
          j["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          j["type"] = "box";
          j["lo"] = vec(s.lo);
          j["hi"] = vec(s.hi);
        } else if constexpr (std::is_same_v<T, HalfSpace>) {
          j["type"] = "half_space";
          j["normal"] = vec(s.normal);
          j["offset"] = s.offset;
        } else if constexpr (std::is_same_v<T, Slab>) {
          j["type"] = "slab";
          j["axis"] = s.axis + 1;
          j["lo"] = s.lo;
          j["hi"] = s.hi;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          j["type"] = "cylinder";
          json idx = json::array();
          for (std::size_t i : s.indices) idx.push_back(i + 1);
          j["indices"] = idx;
          j["inner"] = set_to_json(*s.inner);
        } else {
          j["type"] = "intersection";
          json members = json::array();
          for (const auto& m : s.members) members.push_back(set_to_json(m));
          j["members"] = members;
          j["tol"] = s.tol_proj;
          j["max_iter"] = s.max_iter;
        }
      },
      set.shape());
  return j;
}

json model_to_json(const ModelSpec& spec) {
  json j;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, model::Advection>) {
          j["type"] = "advection";
          j["speeds"] = vec(m.speeds);
        } else if constexpr (std::is_same_v<T, model::Wave1D>) {
          j["type"] = "wave_1d";
          j["mu"] = m.mu;
        } else if constexpr (std::is_same_v<T, model::ElastoPlastic1D>) {
          j["type"] = "elastoplastic_1d";
          j["mu"] = m.mu;
          j["sigma_y"] = m.sigma_y;
        } else {
          j["type"] = "custom";
          json ms = json::array();
          for (const auto& b : m.matrices) {
            json rows = json::array();
            for (std::size_t i = 0; i < b.rows(); ++i) {
              json row = json::array();
              for (std::size_t k = 0; k < b.cols(); ++k) row.push_back(b(i, k));
              rows.push_back(row);
            }
            ms.push_back(rows);
          }
          j["matrices"] = ms;
        }
      },
      spec);
  return j;
}

json solver_to_json(const SolverConfig& c) {
  json j;
  j["epsilon"] = c.epsilon;
  j["eta"] = c.eta;
  j["T"] = c.final_time;
  j["cfl"] = c.cfl;
  j["scheme"] = c.scheme == Scheme::Rusanov ? "rusanov" : "upwind";
  j["relaxation"] = c.relaxation == RelaxationMethod::ImplicitEuler ? "implicit_euler" : "exact";
  j["boundary"] = c.boundary == GhostFill::Extrapolate ? "extrapolate" : "zero";
  j["snapshot_times"] = vec(c.snapshot_times);
  j["record_every"] = c.record_every;
  if (c.mollifier) j["mollifier"] = *c.mollifier;
  if (c.max_dt) j["max_dt"] = *c.max_dt;
  return j;
}

json initial_to_json(const InitialPreset& preset, int dim) {
  json j;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, preset::Bump>) {
          j["preset"] = "bump";
          j["center"] = dim == 2 ? vec(Vector{p.center[0], p.center[1]}) : vec(Vector{p.center[0]});
          j["width"] = p.width;
          j["amplitude"] = vec(p.amplitude);
        } else if constexpr (std::is_same_v<T, preset::Riemann>) {
          j["preset"] = "riemann";
          j["left"] = vec(p.left);
          j["right"] = vec(p.right);
          j["interface"] = p.interface;
          j["half_width"] = p.half_width;
        } else {
          j["preset"] = "constant";
          j["state"] = vec(p.state);
        }
      },
      preset);
  return j;
}

json check_to_json(const CheckSpec& spec) {
  json j;
  j["check"] = check_name(spec);
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, check::Entropy>) {
          j["bumps"] = c.bumps;
          j["budget_constant"] = c.budget_constant;
        } else if constexpr (std::is_same_v<T, check::Contraction>) {
          j["shift"] = c.shift;
          j["radii"] = vec(c.radii);
          if (c.local_tol) j["local_tol"] = *c.local_tol;
        } else if constexpr (std::is_same_v<T, check::FiniteSpeed>) {
          if (c.r0) j["r0"] = *c.r0;
        } else if constexpr (std::is_same_v<T, check::EpsilonStudy>) {
          j["epsilons"] = vec(c.epsilons);
          j["omega"] = c.omega;
        } else if constexpr (std::is_same_v<T, check::EtaStudy>) {
          j["etas"] = vec(c.etas);
          j["omega"] = c.omega;
          j["final_ratio"] = c.final_ratio;
        } else if constexpr (std::is_same_v<T, check::DataStudy>) {
          j["widths"] = vec(c.widths);
        }
      },
      spec);
  return j;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error(ErrorKind::ValidationError, join_issues(issues)), issues_(std::move(issues)) {}

std::string check_name(const CheckSpec& spec) {
  static constexpr const char* names[] = {"energy",        "entropy",   "contraction", "finite_speed",
                                          "epsilon_study", "eta_study", "data_study"};
  return names[spec.index()];
}

bool is_study(const CheckSpec& spec) {
  return std::holds_alternative<check::EpsilonStudy>(spec) || std::holds_alternative<check::EtaStudy>(spec) ||
         std::holds_alternative<check::DataStudy>(spec);
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << e.what();
    throw Error(ErrorKind::ParseError, os.str());
  }

  Reader r;
  if (!r.object(doc, "")) throw ConfigError(r.issues);
  r.allow_keys(doc, "", {"model", "constraint", "grid", "solver", "initial", "verify", "output_dir", "seed"});

  RunConfig cfg;
  std::optional<ModelSpec> model;
  if (const json* m = r.require(doc, "", "model")) model = read_model(r, *m, "model");

  std::optional<std::size_t> m;
  int dim = 1;
  if (model) {
    m = state_dim(*model);
    dim = space_dim(*model);
    const bool own = std::holds_alternative<model::ElastoPlastic1D>(*model);
    const json* c = r.find(doc, "constraint");
    if (own && c) r.fail("constraint", "the elastoplastic_1d model defines its own constraint");
    if (!own && !c) r.fail("constraint", "missing");
    if (!own && c) cfg.constraint = read_set(r, *c, "constraint", *m, std::nullopt);
    // Symmetry and parameter checks live in the model constructor.
    r.guarded<bool>("model", [&] {
      build(*model);
      return true;
    });
  }

  if (const json* g = r.require(doc, "", "grid"); g && r.object(*g, "grid")) {
    r.allow_keys(*g, "grid", {"X", "N"});
    const auto X = positive(r, r.number(*g, "grid", "X"), "grid.X");
    const auto N = r.integer(*g, "grid", "N");
    if (N && (*N < 4 || *N % 2 != 0)) r.fail("grid.N", "must be even and >= 4, got " + std::to_string(*N));
    if (X) cfg.grid.half_width = *X;
    if (N) cfg.grid.cells = static_cast<int>(*N);
  }

  std::optional<SolverConfig> solver;
  if (const json* s = r.require(doc, "", "solver")) solver = read_solver(r, *s, "solver");
  if (solver) cfg.solver = *solver;

  std::optional<InitialPreset> initial;
  if (const json* i = r.require(doc, "", "initial"); i && m) initial = read_initial(r, *i, "initial", *m, dim);
  if (initial) cfg.initial = *initial;

  if (const json* v = r.find(doc, "verify")) {
    if (!v->is_array()) {
      r.fail("verify", "expected an array of checks");
    } else {
      for (std::size_t i = 0; i < v->size(); ++i)
        if (auto c = read_check(r, (*v)[i], element("verify", i))) cfg.verify.push_back(*c);
    }
  }
  if (auto out = r.text(doc, "", "output_dir", std::string("out"))) cfg.output_dir = *out;
  if (auto seed = r.integer(doc, "", "seed", 0)) {
    if (*seed < 0) r.fail("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(std::max(0LL, *seed));
  }

  if (!r.issues.empty()) throw ConfigError(r.issues);
  cfg.model = *model;
  return cfg;
}

std::string canonical_dump(const json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

std::string to_canonical_json(const RunConfig& cfg) {
  const int dim = space_dim(cfg.model);
  json j;
  j["model"] = model_to_json(cfg.model);
  if (cfg.constraint) j["constraint"] = set_to_json(*cfg.constraint);
  j["grid"] = {{"X", cfg.grid.half_width}, {"N", cfg.grid.cells}};
  j["solver"] = solver_to_json(cfg.solver);
  j["initial"] = initial_to_json(cfg.initial, dim);
  json checks = json::array();
  for (const auto& c : cfg.verify) checks.push_back(check_to_json(c));
  j["verify"] = checks;
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return canonical_dump(j);
}

Problem make_problem(const RunConfig& cfg) {
  ModelInstance inst = build(cfg.model);
  ConvexSet k = cfg.constraint ? *cfg.constraint : *inst.constraint;
  Grid grid(static_cast<int>(inst.system.space_dim()), cfg.grid.half_width, cfg.grid.cells);
  return {std::move(inst.system), std::move(k), grid};
}

}  // namespace cfrelax::cli
