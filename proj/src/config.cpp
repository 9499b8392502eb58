#include "obscert/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "obscert/errors.hpp"

namespace obscert {

namespace {

using boost::property_tree::ptree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Stage::config, where + ": '" + text + "' is not a number");
  return v;
}

long long to_integer(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Stage::config, where + ": '" + text + "' is not an integer");
  return v;
}

// One INI section with every key accounted for: reading marks a key used,
// and finish() rejects the rest.
class Section {
 public:
  Section(const ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  [[nodiscard]] bool present() const { return tree_ != nullptr; }
  [[nodiscard]] const std::string& name() const { return name_; }

  std::optional<std::string> get(const std::string& key) {
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    used_.insert(key);
    return trim(it->second.data());
  }
  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v) throw Error(Stage::config, where(key) + " is required");
    return *v;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    return get(key).value_or(fallback);
  }
  double number(const std::string& key, double fallback) {
    auto v = get(key);
    return v ? to_double(*v, where(key)) : fallback;
  }
  long long integer(const std::string& key, long long fallback) {
    auto v = get(key);
    return v ? to_integer(*v, where(key)) : fallback;
  }
  bool flag(const std::string& key, bool fallback) {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    throw Error(Stage::config, where(key) + ": expected true or false");
  }
  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split(require(key), '|')) out.push_back(to_double(item, where(key)));
    return out;
  }
  std::vector<Point> points(const std::string& key) {
    std::vector<Point> out;
    for (const std::string& item : split(require(key), '|')) out.push_back(point_of(item, key));
    return out;
  }
  Point point(const std::string& key) { return point_of(require(key), key); }
  std::vector<std::array<int, 2>> int_pairs(const std::string& key) {
    std::vector<std::array<int, 2>> out;
    for (const std::string& item : split(require(key), '|')) {
      const auto parts = split(item, ',');
      if (parts.size() > 2) throw Error(Stage::config, where(key) + ": at most two components");
      std::array<int, 2> v{0, 0};
      for (std::size_t i = 0; i < parts.size(); ++i)
        v[i] = static_cast<int>(to_integer(parts[i], where(key)));
      out.push_back(v);
    }
    return out;
  }
  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  void finish() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_)
      if (!used_.count(key)) throw Error(Stage::config, "unknown key " + where(key));
  }

 private:
  Point point_of(const std::string& text, const std::string& key) const {
    const auto parts = split(text, ',');
    if (parts.empty() || parts.size() > 2) throw Error(Stage::config, where(key) + ": expected x or x,y");
    Point p;
    p.x = to_double(parts[0], where(key));
    if (parts.size() == 2) p.y = to_double(parts[1], where(key));
    return p;
  }

  const ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

class Sections {
 public:
  explicit Sections(const ptree& root) : root_(root) {
    for (const auto& [name, child] : root_)
      if (child.empty() && !child.data().empty())
        throw Error(Stage::config, "key '" + name + "' appears outside any section");
  }
  Section open(const std::string& name) {
    used_.insert(name);
    const auto it = root_.find(name);
    return Section(it == root_.not_found() ? nullptr : &it->second, name);
  }
  // `headers` also lists empty sections, which the ini reader drops.
  void finish(const std::vector<std::string>& headers) const {
    for (const auto& [name, child] : root_)
      if (!used_.count(name)) throw Error(Stage::config, "unknown section [" + name + "]");
    for (const std::string& name : headers)
      if (!used_.count(name)) throw Error(Stage::config, "unknown section [" + name + "]");
  }

 private:
  const ptree& root_;
  std::set<std::string> used_;
};

template <class T>
void same_length(const std::vector<T>& v, std::size_t n, const std::string& what) {
  if (v.size() != n) throw Error(Stage::config, what + " must have one entry per term");
}

FunctionModel parse_function(Sections& all, Section s, RunConfig& cfg, int depth) {
  if (!s.present()) throw Error(Stage::config, "section [" + s.name() + "] is missing");
  if (depth > 8) throw Error(Stage::config, "product factors nest too deeply");
  const std::string kind = s.require("kind");
  FunctionModel f = FunctionModel::constant(0.0);
  if (kind == "constant") {
    f = FunctionModel::constant(s.number("value", 1.0));
  } else if (kind == "trig_sum" || kind == "eigen_sum") {
    const auto k = s.int_pairs("frequencies");
    const auto amp = s.numbers("amplitudes");
    same_length(amp, k.size(), s.where("amplitudes"));
    std::vector<double> phase(k.size(), 0.0);
    if (s.get("phases")) {
      phase = s.numbers("phases");
      same_length(phase, k.size(), s.where("phases"));
    }
    if (kind == "eigen_sum") {
      if (depth > 0) throw Error(Stage::config, "eigen_sum cannot be a product factor");
      cfg.eigen.present = true;
      for (std::size_t i = 0; i < k.size(); ++i) cfg.eigen.modes.push_back(Mode{k[i], amp[i], phase[i]});
      cfg.eigen.allow_constant = s.flag("allow_constant", false);
      const std::string c = s.text("c_cal", "1");
      if (c != "calibrate") cfg.eigen.C_cal = to_double(c, s.where("c_cal"));
      const EigenSum es = EigenSum::build(cfg.domain.dimension, cfg.eigen.modes, cfg.eigen.allow_constant);
      f = es.model();
    } else {
      std::vector<TrigTerm> terms;
      for (std::size_t i = 0; i < k.size(); ++i) terms.push_back(TrigTerm{k[i], amp[i], phase[i]});
      f = FunctionModel::trig_sum(std::move(terms));
    }
  } else if (kind == "gaussian") {
    const auto centers = s.points("centers");
    const auto widths = s.numbers("widths");
    const auto amp = s.numbers("amplitudes");
    same_length(widths, centers.size(), s.where("widths"));
    same_length(amp, centers.size(), s.where("amplitudes"));
    std::vector<GaussianTerm> terms;
    for (std::size_t i = 0; i < centers.size(); ++i) terms.push_back(GaussianTerm{centers[i], widths[i], amp[i]});
    f = FunctionModel::gaussian(std::move(terms));
  } else if (kind == "polynomial") {
    const auto powers = s.int_pairs("powers");
    const auto coef = s.numbers("coefficients");
    same_length(coef, powers.size(), s.where("coefficients"));
    std::vector<Monomial> terms;
    for (std::size_t i = 0; i < powers.size(); ++i) terms.push_back(Monomial{powers[i][0], powers[i][1], coef[i]});
    f = FunctionModel::polynomial(std::move(terms));
  } else if (kind == "product") {
    const auto names = split(s.require("factors"), '|');
    if (names.size() < 2) throw Error(Stage::config, s.where("factors") + " needs at least two sections");
    f = parse_function(all, all.open(names[0]), cfg, depth + 1);
    for (std::size_t i = 1; i < names.size(); ++i)
      f = FunctionModel::product(f, parse_function(all, all.open(names[i]), cfg, depth + 1));
  } else {
    throw Error(Stage::config, s.where("kind") + ": unknown function kind '" + kind + "'");
  }
  s.finish();
  return f;
}

void parse_domain(Section s, DomainSpec& d) {
  if (!s.present()) throw Error(Stage::config, "section [domain] is missing");
  const std::string kind = s.require("kind");
  if (kind == "box") d.kind = DomainKind::box;
  else if (kind == "disk") d.kind = DomainKind::disk;
  else if (kind == "torus") d.kind = DomainKind::torus;
  else throw Error(Stage::config, s.where("kind") + ": expected box, disk or torus");
  d.dimension = static_cast<int>(s.integer("dimension", d.kind == DomainKind::disk ? 2 : 1));
  if (d.dimension != 1 && d.dimension != 2) throw Error(Stage::config, s.where("dimension") + ": 1 or 2");
  if (d.kind == DomainKind::disk) {
    if (d.dimension != 2) throw Error(Stage::config, "a disk is two-dimensional");
    const double R = s.number("radius", 0.5);
    d.extent = {2.0 * R, 2.0 * R};
  } else {
    std::vector<double> e{1.0};
    if (s.get("extent")) e = s.numbers("extent");
    if (e.size() == 1) e.push_back(d.dimension == 2 ? e[0] : 1.0);
    if (e.size() != 2) throw Error(Stage::config, s.where("extent") + ": one or two lengths");
    d.extent = {e[0], d.dimension == 2 ? e[1] : 1.0};
  }
  const int fallback = d.dimension == 1 ? 1024 : 512;
  d.cells = {fallback, d.dimension == 1 ? 1 : fallback};
  if (s.get("cells")) {
    const auto c = s.numbers("cells");
    if (c.empty() || c.size() > 2) throw Error(Stage::config, s.where("cells") + ": one or two counts");
    d.cells[0] = static_cast<int>(c[0]);
    if (d.dimension == 2) d.cells[1] = static_cast<int>(c.size() == 2 ? c[1] : c[0]);
    if (c[0] != std::floor(c[0]) || d.cells[0] < 1 || d.cells[1] < 1)
      throw Error(Stage::config, s.where("cells") + ": positive integers");
  }
  s.finish();
}

void parse_set(Section s, SetSpec& set) {
  if (!s.present()) throw Error(Stage::config, "section [set] is missing");
  const std::string kind = s.require("kind");
  if (kind == "full") {
    set.kind = SetSpec::Kind::full;
  } else if (kind == "mask") {
    set.kind = SetSpec::Kind::mask_file;
    set.file = s.require("file");
  } else if (kind == "region") {
    set.kind = SetSpec::Kind::region;
    set.shape = s.require("shape");
    if (set.shape == "interval" || set.shape == "box") {
      set.lower = s.point("lower");
      set.upper = s.point("upper");
    } else if (set.shape == "ball") {
      set.center = s.point("center");
      set.radius = s.number("radius", 0.0);
    } else {
      throw Error(Stage::config, s.where("shape") + ": expected interval, box or ball");
    }
  } else if (kind == "random") {
    set.kind = SetSpec::Kind::random;
    set.fraction = s.number("fraction", 0.1);
    const std::string style = s.text("style", "blobs");
    if (style == "blobs") set.style = MaskStyle::blobs;
    else if (style == "scatter") set.style = MaskStyle::scatter;
    else throw Error(Stage::config, s.where("style") + ": expected blobs or scatter");
  } else {
    throw Error(Stage::config, s.where("kind") + ": expected full, mask, region or random");
  }
  s.finish();
}

}  // namespace

Domain RunConfig::make_domain() const {
  if (domain.kind == DomainKind::disk) return Domain::disk(domain.extent[0] / 2.0);
  return Domain::make(domain.kind, domain.dimension, domain.extent);
}

Grid RunConfig::make_grid() const { return Grid(make_domain(), domain.cells); }

MeasurableSet RunConfig::make_set(const Grid& grid) const {
  switch (set.kind) {
    case SetSpec::Kind::full:
      return MeasurableSet::full(grid);
    case SetSpec::Kind::mask_file: {
      std::filesystem::path p(set.file);
      if (p.is_relative()) p = std::filesystem::path(source_dir) / p;
      std::ifstream in(p);
      if (!in) throw Error(Stage::config, "cannot open mask file " + p.string());
      return read_mask(in, grid);
    }
    case SetSpec::Kind::region: {
      const SetSpec s = set;
      if (s.shape == "ball")
        return MeasurableSet::from_predicate(grid, [&](Point p) {
          return grid.domain().distance(p, s.center) <= s.radius;
        });
      return MeasurableSet::from_predicate(grid, [&](Point p) {
        const bool in_x = p.x >= s.lower.x && p.x <= s.upper.x;
        return grid.dimension() == 1 ? in_x : in_x && p.y >= s.lower.y && p.y <= s.upper.y;
      });
    }
    case SetSpec::Kind::random:
      return random_mask(grid, set.fraction, seed, set.style);
  }
  throw Error(Stage::internal, "unhandled set kind");
}

RunConfig parse_config(std::istream& in, const std::string& source_dir) {
  const std::string text{std::istreambuf_iterator<char>(in), {}};
  std::vector<std::string> headers;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const std::string t = trim(line);
      if (t.size() >= 2 && t.front() == '[' && t.back() == ']') headers.push_back(trim(t.substr(1, t.size() - 2)));
    }
  }
  ptree root;
  try {
    std::istringstream body(text);
    boost::property_tree::ini_parser::read_ini(body, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Stage::config, std::string("config: ") + e.what());
  }
  RunConfig cfg;
  cfg.source_dir = source_dir;
  Sections all(root);

  {
    Section s = all.open("run");
    cfg.name = s.text("name", cfg.name);
    const long long seed = s.integer("seed", 1);
    if (seed < 0) throw Error(Stage::config, s.where("seed") + " must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    const long long workers = s.integer("workers", 0);
    if (workers < 0) throw Error(Stage::config, s.where("workers") + " must be nonnegative");
    cfg.workers = static_cast<unsigned>(workers);
    cfg.branch = s.text("branch", "auto");
    if (cfg.branch != "auto" && cfg.branch != "sigma1" && cfg.branch != "sigma-gt1" && cfg.branch != "ucp")
      throw Error(Stage::config, s.where("branch") + ": expected auto, sigma1, sigma-gt1 or ucp");
    cfg.search_width = static_cast<int>(s.integer("search_width", 16));
    cfg.directions = static_cast<int>(s.integer("directions", 64));
    if (cfg.search_width < 0 || cfg.directions < 1)
      throw Error(Stage::config, "[run] search_width >= 0 and directions >= 1 required");
    s.finish();
  }
  {
    Section s = all.open("output");
    cfg.output_dir = s.text("dir", cfg.output_dir);
    cfg.write_mask = s.flag("mask", false);
    s.finish();
  }
  parse_domain(all.open("domain"), cfg.domain);
  cfg.function = parse_function(all, all.open("function"), cfg, 0);
  cfg.function_text = cfg.function.describe();
  parse_set(all.open("set"), cfg.set);
  {
    Section s = all.open("gevrey");
    const std::string mode = s.text("mode", "closed_form");
    if (mode == "explicit") {
      cfg.gevrey.closed_form = false;
      cfg.gevrey.certificate = GevreyCertificate{s.number("M", 1.0), s.number("delta", 1.0),
                                                 s.number("sigma", 1.0)};
      validate(cfg.gevrey.certificate);
    } else if (mode == "closed_form") {
      if (s.get("sigma")) cfg.gevrey.sigma = s.number("sigma", 1.0);
    } else {
      throw Error(Stage::config, s.where("mode") + ": expected closed_form or explicit");
    }
    cfg.gevrey.kmax = static_cast<int>(s.integer("kmax", 12));
    cfg.gevrey.directions = static_cast<int>(s.integer("directions", 16));
    if (cfg.gevrey.kmax < 1 || cfg.gevrey.directions < 1)
      throw Error(Stage::config, "[gevrey] kmax and directions must be positive");
    s.finish();
  }
  {
    Section s = all.open("doubling");
    const std::string mode = s.text("mode", "estimate");
    if (mode == "explicit") {
      cfg.doubling.estimate = false;
      cfg.doubling.certificate = DoublingCertificate{s.number("kappa", 2.0), s.number("r0", 0.5)};
      validate(cfg.doubling.certificate);
    } else if (mode == "estimate") {
      cfg.doubling.r0 = s.number("r0", 0.5);
      if (!(cfg.doubling.r0 > 0.0 && cfg.doubling.r0 <= 1.0))
        throw Error(Stage::config, s.where("r0") + " must lie in (0, 1]");
    } else {
      throw Error(Stage::config, s.where("mode") + ": expected estimate or explicit");
    }
    cfg.doubling.centers = static_cast<int>(s.integer("centers", 64));
    if (cfg.doubling.centers < 1) throw Error(Stage::config, "[doubling] centers must be positive");
    s.finish();
  }
  {
    Section s = all.open("ucp");
    if (s.present()) {
      cfg.ucp.present = true;
      const std::string mode = s.text("mode", "explicit");
      if (mode != "explicit" && mode != "estimate")
        throw Error(Stage::config, s.where("mode") + ": expected explicit or estimate");
      cfg.ucp.estimate = mode == "estimate";
      cfg.ucp.certificate = UcpCertificate{cfg.ucp.estimate ? 1.0 : s.number("a", 1.0),
                                           s.number("b", 1.0), s.number("r0", 0.5)};
      cfg.ucp.margin = s.number("margin", 1.01);
      cfg.ucp.centers = static_cast<int>(s.integer("centers", 64));
      validate(cfg.ucp.certificate);
      if (!(cfg.ucp.margin >= 1.0) || cfg.ucp.centers < 1)
        throw Error(Stage::config, "[ucp] margin >= 1 and centers >= 1 required");
      s.finish();
    }
  }
  {
    Section s = all.open("sweep");
    if (s.present()) {
      if (s.get("fractions")) cfg.sweep.fractions = s.numbers("fractions");
      if (s.get("n")) {
        const auto n = s.numbers("n");
        if (n.size() != 2 || n[0] < 0 || n[1] < n[0] || n[0] != std::floor(n[0]) || n[1] != std::floor(n[1]))
          throw Error(Stage::config, s.where("n") + ": expected lo | hi with 0 <= lo <= hi");
        cfg.sweep.n_range = std::array<int, 2>{static_cast<int>(n[0]), static_cast<int>(n[1])};
      }
      if (s.get("eigen_k"))
        for (double k : s.numbers("eigen_k")) {
          if (k != std::floor(k) || k < 1) throw Error(Stage::config, s.where("eigen_k") + ": positive integers");
          cfg.sweep.eigen_k.push_back(static_cast<int>(k));
        }
      cfg.sweep.masks = static_cast<int>(s.integer("masks", 5));
      cfg.sweep.mask_fraction = s.number("mask_fraction", 0.1);
      for (double q : cfg.sweep.fractions)
        if (!(q > 0.0 && q <= 1.0)) throw Error(Stage::config, s.where("fractions") + ": values in (0, 1]");
      if (cfg.sweep.masks < 1 || !(cfg.sweep.mask_fraction > 0.0 && cfg.sweep.mask_fraction <= 1.0))
        throw Error(Stage::config, "[sweep] masks >= 1 and mask_fraction in (0, 1] required");
      s.finish();
    }
  }
  all.finish(headers);
  if (cfg.set.kind == SetSpec::Kind::random && !(cfg.set.fraction > 0.0 && cfg.set.fraction <= 1.0))
    throw Error(Stage::config, "[set] fraction must lie in (0, 1]");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Stage::config, "cannot open config " + path);
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_config(in, parent.empty() ? "." : parent.string());
}

}  // namespace obscert
