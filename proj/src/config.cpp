#include "oblique/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "oblique/errors.hpp"
#include "oblique/random.hpp"
#include "toml.hpp"

namespace oblique {

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// A table plus its dotted path; every accessor reports file:line and field.
class Section {
 public:
  Section(const toml::table& table, std::string path, const std::string& file)
      : table_(&table), path_(std::move(path)), file_(&file) {}

  const std::string& path() const { return path_; }
  bool has(std::string_view key) const { return table_->contains(key); }

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    const toml::node* n = table_->get(key);
    const auto line = n ? n->source().begin.line : table_->source().begin.line;
    std::ostringstream msg;
    msg << *file_ << ':' << line << ": field '" << join(path_, key) << "': " << what;
    throw ConfigError(msg.str());
  }

  const toml::node& node(std::string_view key) {
    seen_.insert(std::string(key));
    const toml::node* n = table_->get(key);
    if (!n) fail(key, "missing");
    return *n;
  }

  double number(std::string_view key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(key, "missing");
    }
    return as_number(node(key), key);
  }

  double positive(std::string_view key, std::optional<double> fallback = std::nullopt) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  std::int64_t integer(std::string_view key, std::optional<std::int64_t> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(key, "missing");
    }
    const auto v = node(key).value<std::int64_t>();
    if (!v || !node(key).is_integer()) fail(key, "expected an integer");
    return *v;
  }

  std::size_t count(std::string_view key, std::optional<std::size_t> fallback = std::nullopt) {
    const std::int64_t v = integer(key, fallback ? std::optional<std::int64_t>(static_cast<std::int64_t>(*fallback)) : std::nullopt);
    if (v < 0) fail(key, "must be nonnegative");
    return static_cast<std::size_t>(v);
  }

  std::string text(std::string_view key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(key, "missing");
    }
    const auto v = node(key).value<std::string>();
    if (!v) fail(key, "expected a string");
    return *v;
  }

  bool flag(std::string_view key, bool fallback) {
    if (!has(key)) return fallback;
    const auto v = node(key).value<bool>();
    if (!v) fail(key, "expected true or false");
    return *v;
  }

  std::vector<double> numbers(std::string_view key) {
    const toml::node& n = node(key);
    if (n.is_number()) return {as_number(n, key)};
    const toml::array* arr = n.as_array();
    if (!arr) fail(key, "expected a number or an array of numbers");
    std::vector<double> out;
    for (const toml::node& e : *arr) out.push_back(as_number(e, key));
    return out;
  }

  Vec vector(std::string_view key, std::optional<int> dim = std::nullopt) {
    const std::vector<double> v = numbers(key);
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) fail(key, "expected 1 to 3 entries");
    if (dim && static_cast<int>(v.size()) != *dim) fail(key, "expected " + std::to_string(*dim) + " entries");
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  Mat matrix(std::string_view key, int rows, int cols) {
    const toml::node& n = node(key);
    if (n.is_number() && rows == 1 && cols == 1) {
      Mat m(1, 1);
      m(0, 0) = as_number(n, key);
      return m;
    }
    const toml::array* arr = n.as_array();
    if (!arr || static_cast<int>(arr->size()) != rows) fail(key, "expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      const toml::array* row = (*arr)[static_cast<std::size_t>(i)].as_array();
      if (!row || static_cast<int>(row->size()) != cols) fail(key, "expected rows of " + std::to_string(cols) + " numbers");
      for (int j = 0; j < cols; ++j) m(i, j) = as_number((*row)[static_cast<std::size_t>(j)], key);
    }
    return m;
  }

  Section sub(std::string_view key) {
    const toml::table* t = node(key).as_table();
    if (!t) fail(key, "expected a table");
    return Section(*t, join(path_, key), *file_);
  }

  std::vector<Section> subs(std::string_view key) {
    const toml::array* arr = node(key).as_array();
    if (!arr || arr->empty()) fail(key, "expected a non-empty array of tables");
    std::vector<Section> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const toml::table* t = (*arr)[i].as_table();
      if (!t) fail(key, "expected a table in entry " + std::to_string(i));
      out.emplace_back(*t, join(path_, key) + "[" + std::to_string(i) + "]", *file_);
    }
    return out;
  }

  /// Rejects keys nobody asked for.
  void finish() const {
    for (const auto& [k, v] : *table_)
      if (!seen_.count(std::string(k.str()))) fail(k.str(), "unknown field");
  }

 private:
  double as_number(const toml::node& n, std::string_view key) const {
    if (!n.is_number()) fail(key, "expected a number");
    return *n.value<double>();
  }

  const toml::table* table_;
  std::string path_;
  const std::string* file_;
  std::set<std::string> seen_;
};

Motion parse_motion(Section& parent, std::string_view key, double horizon) {
  if (parent.has(key) && parent.node(key).is_number()) return Motion::constant(parent.number(key));
  Section s = parent.sub(key);
  const std::string kind = s.text("kind");
  Motion m = Motion::constant(0.0);
  if (kind == "constant") {
    m = Motion::constant(s.number("value"));
  } else if (kind == "linear") {
    m = Motion::linear(s.number("value"), s.number("slope"));
  } else if (kind == "polynomial") {
    m = Motion::polynomial(s.numbers("coefficients"));
  } else if (kind == "sine") {
    m = Motion::sine(s.number("amplitude"), s.number("frequency"), s.number("phase", 0.0), s.number("offset", 0.0),
                     horizon, static_cast<int>(s.count("segments", 512)));
  } else if (kind == "square_root") {
    m = Motion::square_root(s.number("scale"), s.number("offset", 0.0));
  } else if (kind == "hermite") {
    try {
      m = Motion::hermite(s.numbers("knots"), s.numbers("values"), s.numbers("derivatives"));
    } catch (const ParameterError& e) {
      s.fail("knots", e.what());
    }
  } else {
    s.fail("kind", "unknown motion '" + kind + "'");
  }
  s.finish();
  return m;
}

DomainSpec parse_domain(Section s) {
  const std::string kind = s.text("kind");
  const double T = s.positive("horizon");
  try {
    if (kind == "interval") {
      Motion lo = parse_motion(s, "lower", T), hi = parse_motion(s, "upper", T);
      s.finish();
      return DomainSpec::interval(T, lo, hi);
    }
    if (kind == "half_line") {
      Motion lo = parse_motion(s, "lower", T);
      const double width = s.positive("width", 1e3);
      s.finish();
      return DomainSpec::half_line(T, lo, width);
    }
    if (kind == "disk") {
      Motion cx = parse_motion(s, "cx", T), cy = parse_motion(s, "cy", T), r = parse_motion(s, "radius", T);
      s.finish();
      return DomainSpec::disk(T, cx, cy, r);
    }
    if (kind == "polygon") {
      Motion cx = parse_motion(s, "cx", T), cy = parse_motion(s, "cy", T), sc = parse_motion(s, "scale", T);
      const toml::array* arr = s.node("vertices").as_array();
      if (!arr || arr->size() < 3) s.fail("vertices", "expected at least three [x, y] pairs");
      std::vector<Eigen::Vector2d> base;
      for (const toml::node& v : *arr) {
        const toml::array* p = v.as_array();
        if (!p || p->size() != 2 || !(*p)[0].is_number() || !(*p)[1].is_number())
          s.fail("vertices", "expected [x, y] pairs");
        base.emplace_back(*(*p)[0].value<double>(), *(*p)[1].value<double>());
      }
      s.finish();
      return DomainSpec::polygon(T, cx, cy, sc, std::move(base));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    s.fail("kind", e.what());
  }
  s.fail("kind", "unknown domain '" + kind + "'");
}

ReflectionField parse_field(Section s, int dim) {
  const std::string kind = s.text("kind", std::string("inward_normal"));
  const double inf = std::numeric_limits<double>::infinity();
  ReflectionField f = ReflectionField::inward_normal();
  if (kind == "inward_normal") {
    f = ReflectionField::inward_normal(s.positive("width", 1e-2), s.positive("tube", inf));
  } else if (kind == "rotated") {
    f = ReflectionField::rotated(s.number("angle"), s.positive("width", 1e-2), s.positive("tube", inf));
  } else if (kind == "constant") {
    const Vec d = s.vector("direction", dim);
    if (!(d.norm() > 0.0)) s.fail("direction", "must be nonzero");
    f = ReflectionField::constant(d / d.norm());
  } else {
    s.fail("kind", "unknown field '" + kind + "'");
  }
  s.finish();
  return f;
}

Tolerances parse_tolerances(Section s) {
  Tolerances t;
  t.boundary_tol = s.positive("boundary_tol", t.boundary_tol);
  t.direction_tol_deg = s.positive("direction_tol_deg", t.direction_tol_deg);
  t.interior_fraction_tol = s.positive("interior_fraction_tol", t.interior_fraction_tol);
  t.oracle = s.positive("oracle", t.oracle);
  t.comparison = s.positive("comparison", t.comparison);
  t.margin = s.positive("margin", t.margin);
  t.fd_tolerance = s.positive("fd_tolerance", t.fd_tolerance);
  t.mc_sigmas = s.positive("mc_sigmas", t.mc_sigmas);
  t.mc_slack = s.number("mc_slack", t.mc_slack);
  s.finish();
  return t;
}

Payoff parse_payoff(Section s, int dim) {
  const std::string kind = s.text("kind");
  Payoff p = ConstantPayoff{};
  const auto index = [&] {
    const auto i = static_cast<int>(s.count("index", 0));
    if (i >= dim) s.fail("index", "out of range");
    return i;
  };
  if (kind == "constant")
    p = ConstantPayoff{s.number("value")};
  else if (kind == "coordinate")
    p = CoordinatePayoff{index()};
  else if (kind == "cosine")
    p = CosinePayoff{index(), s.number("amplitude", 1.0), s.number("frequency"), s.number("phase", 0.0)};
  else
    s.fail("kind", "unknown function '" + kind + "'");
  s.finish();
  return p;
}

SampledPath parse_psi(Section s, double T, std::size_t steps, int dim, std::optional<std::uint64_t> seed,
                      const std::string& base_dir) {
  const std::string kind = s.text("kind");
  SampledPath out;
  if (kind == "constant") {
    const Vec v = s.vector("value", dim);
    out = SampledPath::constant(T, steps, v);
  } else if (kind == "linear") {
    const Vec a = s.vector("start", dim), b = s.vector("slope", dim);
    out = SampledPath::uniform(T, steps, [&](double t) { return Vec(a + t * b); });
  } else if (kind == "sine") {
    const Vec amp = s.vector("amplitude", dim), freq = s.vector("frequency", dim);
    const Vec off = s.has("offset") ? s.vector("offset", dim) : Vec(Vec::Zero(dim));
    out = SampledPath::uniform(T, steps, [&](double t) {
      Vec v(dim);
      for (int i = 0; i < dim; ++i) v(i) = off(i) + amp(i) * std::sin(freq(i) * t);
      return v;
    });
  } else if (kind == "random_walk") {
    if (!seed) s.fail("kind", "a random walk needs the top-level seed");
    const Vec start = s.vector("start", dim);
    const double scale = s.positive("scale");
    const Vec drift = s.has("drift") ? s.vector("drift", dim) : Vec(Vec::Zero(dim));
    RngStream rng(*seed, 0x5053ULL);
    std::vector<Vec> v(steps + 1, start);
    for (std::size_t k = 1; k <= steps; ++k) {
      Vec z(dim);
      for (int i = 0; i < dim; ++i) z(i) = rng.normal();
      v[k] = v[k - 1] + scale * z + drift * (T / static_cast<double>(steps));
    }
    out = SampledPath::uniform(T, steps, [&](double t) {
      return v[static_cast<std::size_t>(std::lround(t / T * static_cast<double>(steps)))];
    });
  } else if (kind == "csv") {
    const std::filesystem::path file = std::filesystem::path(base_dir) / s.text("file");
    std::ifstream in(file);
    if (!in) s.fail("file", "cannot open '" + file.string() + "'");
    out = read_csv(in);
    if (out.dimension() != dim) s.fail("file", "path dimension does not match the domain");
    if (std::abs(out.horizon() - T) > 1e-12 * T) s.fail("file", "path horizon does not match the domain");
  } else {
    s.fail("kind", "unknown path '" + kind + "'");
  }
  s.finish();
  return out;
}

DriftSpec parse_drift(Section s, int n) {
  const std::string kind = s.text("kind");
  DriftSpec d = ConstantDrift{};
  if (kind == "constant") {
    d = ConstantDrift{s.vector("b", n)};
  } else if (kind == "affine") {
    d = AffineDrift{s.has("b0") ? s.vector("b0", n) : Vec(Vec::Zero(n)), s.matrix("B", n, n)};
  } else if (kind == "table") {
    TableDrift t;
    for (Section term : s.subs("terms")) {
      t.amplitude.push_back(term.vector("amplitude", n));
      t.wave.push_back(term.vector("wave", n));
      t.phase.push_back(term.number("phase", 0.0));
      term.finish();
    }
    d = t;
  } else {
    s.fail("kind", "unknown drift '" + kind + "'");
  }
  s.finish();
  return d;
}

DiffusionSpec parse_diffusion(Section s, int n, int m) {
  const std::string kind = s.text("kind");
  DiffusionSpec d = ConstantDiffusion{};
  if (kind == "constant") {
    d = ConstantDiffusion{s.matrix("S", n, m)};
  } else if (kind == "affine") {
    AffineDiffusion a{s.matrix("S0", n, m), {}};
    if (s.has("Sx"))
      for (Section term : s.subs("Sx")) {
        a.Sx.push_back(term.matrix("S", n, m));
        term.finish();
      }
    if (static_cast<int>(a.Sx.size()) > n) s.fail("Sx", "at most one matrix per coordinate");
    d = a;
  } else if (kind == "table") {
    d = TableDiffusion{s.matrix("S0", n, m), s.matrix("S1", n, m), s.vector("wave", n), s.number("phase", 0.0)};
  } else {
    s.fail("kind", "unknown diffusion '" + kind + "'");
  }
  s.finish();
  return d;
}

LinearDiffusion parse_linear(Section s) {
  LinearDiffusion l = LinearDiffusion::constant(s.number("diffusivity"), s.number("drift", 0.0), s.number("lambda", 1e-12));
  if (l.diffusivity(0, 0) < 0.0) s.fail("diffusivity", "must be nonnegative");
  if (l.lambda < 0.0) s.fail("lambda", "must be nonnegative");
  s.finish();
  return l;
}

PdeGrid parse_grid(Section& s) {
  PdeGrid g;
  g.intervals = s.count("intervals", g.intervals);
  if (g.intervals < 3) s.fail("intervals", "must be at least 3");
  g.dt = s.number("dt", 0.0);
  if (g.dt < 0.0) s.fail("dt", "must be nonnegative");
  g.cfl_fraction = s.positive("cfl_fraction", g.cfl_fraction);
  g.allow_cfl_violation = s.flag("allow_cfl_violation", false);
  g.saved_levels = s.count("saved_levels", g.saved_levels);
  if (g.saved_levels < 2) s.fail("saved_levels", "must be at least 2");
  return g;
}

void require_seed(Section& root, const std::optional<std::uint64_t>& seed, const std::string& kind) {
  if (!seed) root.fail("seed", "required for the stochastic experiment '" + kind + "'");
}

const std::vector<std::string> kKinds = {"skorohod", "sde", "pde", "crosscheck", "verify-domain", "verify-testfn"};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source, const std::string& base_dir,
                              const RunOverrides& overrides) {
  toml::table root_table;
  try {
    root_table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ':' << e.source().begin.line << ':' << e.source().begin.column << ": " << e.description();
    throw ConfigError(msg.str());
  }
  Section root(root_table, "", source);

  std::optional<std::uint64_t> seed;
  if (root.has("seed")) {
    const std::int64_t v = root.integer("seed");
    if (v < 0) root.fail("seed", "must be nonnegative");
    seed = static_cast<std::uint64_t>(v);
  }
  if (overrides.seed) seed = overrides.seed;
  std::string output = root.text("output", std::string("out"));
  if (overrides.output) output = *overrides.output;

  std::string kind;
  for (const std::string& k : kKinds)
    if (root.has(k)) {
      if (!kind.empty()) root.fail(k, "only one experiment block is allowed (found '" + kind + "' too)");
      kind = k;
    }
  if (kind.empty()) throw ConfigError(source + ":1: no experiment block (one of skorohod, sde, pde, crosscheck, verify-domain, verify-testfn)");

  const DomainSpec domain = parse_domain(root.sub("domain"));
  const int dim = domain.dimension();
  const ReflectionField field = root.has("field") ? parse_field(root.sub("field"), dim) : ReflectionField::inward_normal();
  const Tolerances tol = root.has("tolerances") ? parse_tolerances(root.sub("tolerances")) : Tolerances{};
  const unsigned workers = overrides.workers.value_or(0);
  const double T = domain.horizon();

  Section block = root.sub(kind);
  std::optional<Experiment> experiment;
  if (kind == "skorohod") {
    const std::size_t steps = block.count("steps", 1000);
    if (steps == 0) block.fail("steps", "must be positive");
    SkorohodExperiment e{parse_psi(block.sub("psi"), T, steps, dim, seed, base_dir), {}, false};
    if (block.has("eps_schedule")) e.penalty.eps_schedule = block.numbers("eps_schedule");
    e.penalty.eta = block.positive("eta", e.penalty.eta);
    e.penalty.max_substeps = block.count("max_substeps", e.penalty.max_substeps);
    e.penalty.boundary_tol = tol.boundary_tol;
    e.penalty.direction_tol_deg = tol.direction_tol_deg;
    e.penalty.interior_fraction_tol = tol.interior_fraction_tol;
    try {
      e.penalty.validate();
    } catch (const ParameterError& err) {
      block.fail("eps_schedule", err.what());
    }
    e.oracle = block.flag("oracle", false);
    if (e.oracle && (dim != 1 || !std::holds_alternative<MovingInterval>(domain.shape())))
      block.fail("oracle", "the half-line oracle needs a one-dimensional domain");
    experiment = std::move(e);
  } else if (kind == "sde") {
    require_seed(root, seed, kind);
    SdeExperiment e;
    SdeConfig& c = e.sde;
    c.noise_dim = static_cast<int>(block.count("noise_dim", 1));
    if (c.noise_dim < 1 || c.noise_dim > kMaxDim) block.fail("noise_dim", "must be between 1 and 3");
    c.drift = parse_drift(block.sub("drift"), dim);
    c.diffusion = parse_diffusion(block.sub("diffusion"), dim, c.noise_dim);
    c.lipschitz = block.number("lipschitz", 0.0);
    c.x0 = block.vector("x0", dim);
    c.steps = block.count("steps", 1000);
    c.paths = block.count("paths", 1000);
    if (c.steps == 0 || c.paths == 0) block.fail("steps", "steps and paths must be positive");
    c.micro_ratio = block.positive("micro_ratio", c.micro_ratio);
    c.seed = *seed;
    c.workers = workers;
    c.boundary_tol = tol.boundary_tol;
    if (block.has("payoff")) e.payoff = parse_payoff(block.sub("payoff"), dim);
    if (block.has("expected")) {
      if (!e.payoff) block.fail("expected", "needs a payoff");
      e.expected = block.number("expected");
    }
    e.save_paths = block.count("save_paths", 0);
    experiment = std::move(e);
  } else if (kind == "pde") {
    if (!std::holds_alternative<MovingInterval>(domain.shape())) root.fail("domain", "the pde experiment needs an interval");
    PdeOperator op = LinearDiffusion::constant(0.5);
    if (block.has("terms")) {
      MaxOfLinear mx;
      for (Section term : block.subs("terms")) mx.terms.push_back(parse_linear(term));
      op = mx;
    } else {
      op = LinearDiffusion::constant(block.number("diffusivity"), block.number("drift", 0.0), block.number("lambda", 1e-12));
      if (std::get<LinearDiffusion>(op).lambda < 0.0) block.fail("lambda", "must be nonnegative");
      if (block.number("diffusivity") < 0.0) block.fail("diffusivity", "must be nonnegative");
    }
    BoundaryDatum f = neumann();
    if (block.has("boundary")) {
      Section b = block.sub("boundary");
      const double slope = b.number("slope", 0.0), cubic = b.number("cubic", 0.0);
      if (slope < 0.0) b.fail("slope", "must be nonnegative (f nondecreasing in r)");
      if (cubic < 0.0) b.fail("cubic", "must be nonnegative (f nondecreasing in r)");
      f = polynomial_boundary(b.number("offset", 0.0), slope, cubic);
      b.finish();
    }
    const Payoff g = parse_payoff(block.sub("initial"), 1);
    PdeExperiment e{PdeProblem{domain, op, f, field.outward(), [g](double x) { return eval_payoff(g, vec1(x)); }},
                    parse_grid(block), std::nullopt};
    if (block.has("compare_with")) e.compare_with = parse_payoff(block.sub("compare_with"), 1);
    experiment = std::move(e);
  } else if (kind == "crosscheck") {
    require_seed(root, seed, kind);
    if (!std::holds_alternative<MovingInterval>(domain.shape())) root.fail("domain", "the cross-check needs an interval");
    CrosscheckExperiment e;
    e.sigma = block.positive("sigma", 1.0);
    e.g = parse_payoff(block.sub("payoff"), 1);
    e.grid = parse_grid(block);
    e.mc.x0 = block.vector("x0", 1);
    e.mc.steps = block.count("steps", 2000);
    e.mc.paths = block.count("paths", 20000);
    if (e.mc.steps == 0 || e.mc.paths == 0) block.fail("steps", "steps and paths must be positive");
    e.mc.seed = *seed;
    e.mc.workers = workers;
    experiment = std::move(e);
  } else if (kind == "verify-domain") {
    require_seed(root, seed, kind);
    VerifyDomainExperiment e;
    e.certificate.rho = block.positive("rho", e.certificate.rho);
    e.certificate.theta = block.positive("theta", e.certificate.theta);
    e.certificate.delta = block.positive("delta", e.certificate.delta);
    e.certificate.holder_k = block.positive("holder_k", e.certificate.holder_k);
    e.budget.boundary_points = block.count("boundary_points", e.budget.boundary_points);
    e.budget.time_pairs = block.count("time_pairs", e.budget.time_pairs);
    e.budget.mollifier_width = block.positive("mollifier_width", e.budget.mollifier_width);
    e.budget.seed = *seed;
    experiment = std::move(e);
  } else {
    require_seed(root, seed, kind);
    VerifyTestfnExperiment e;
    e.params.theta = block.positive("theta", e.params.theta);
    e.params.band_constant = block.positive("band_constant", e.params.band_constant);
    e.params.blend_width = block.positive("blend_width", e.params.blend_width);
    try {
      validate(e.params);
    } catch (const ParameterError& err) {
      block.fail("theta", err.what());
    }
    e.sampler.points = block.count("points", e.sampler.points);
    if (block.has("eps")) e.sampler.eps = block.numbers("eps");
    e.sampler.safety = block.positive("safety", e.sampler.safety);
    e.sampler.margin = tol.margin;
    e.sampler.fd_tolerance = tol.fd_tolerance;
    e.sampler.seed = *seed;
    experiment = std::move(e);
  }
  block.finish();
  // Mark the top-level keys consumed above.
  for (const char* k : {"seed", "output", "domain", "field", "tolerances"})
    if (root.has(k)) root.node(k);
  root.node(kind);
  root.finish();
  return ExperimentConfig{source, kind, seed, output, domain, field, tol, std::move(*experiment)};
}

ExperimentConfig load_config(const std::string& path, const RunOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(ss.str(), path, base.empty() ? "." : base, overrides);
}

}  // namespace oblique
