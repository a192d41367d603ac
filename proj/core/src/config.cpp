#include "copula_oed/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace copula_oed {

namespace {

struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"", {"command", "scenario", "output"}},
      {"model",
       {"kind", "pair", "epsilon", "tau_max", "alpha2", "x_max", "dependence", "quadrature_order"}},
      {"copula",
       {"family", "alpha1", "mix_family", "mix_alpha1", "mix_weight", "khoudraji_alpha2",
        "khoudraji_alpha3"}},
      {"criterion", {"kind", "s", "A"}},
      {"optimizer", {"grid", "delta", "weight_floor", "max_iterations", "polish", "refine_factor"}},
      {"parameters", {}},
      {"design", {"support"}},
  };
  return keys;
}

// Raw key/value entries with their source positions, after syntax checks.
struct Entry {
  std::string value;
  Location key_at;
  Location value_at;
};

class Document {
 public:
  explicit Document(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = trim(raw);
      const std::size_t indent = raw.find_first_not_of(" \t") + 1;
      if (line.empty() || line.front() == '#' || line.front() == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("unterminated section header", line_no, indent + line.size());
        section = trim(std::string_view(line).substr(1, line.size() - 2));
        if (!schema().contains(section) || section.empty())
          throw ConfigError("unknown section [" + section + "]", line_no, indent + 1, section);
        if (!sections_.insert(section).second)
          throw ConfigError("duplicate section [" + section + "]", line_no, indent + 1, section);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected 'key = value'", line_no, indent);
      const std::string key = trim(std::string_view(line).substr(0, eq));
      std::string value = trim(std::string_view(line).substr(eq + 1));
      if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
      if (key.empty()) throw ConfigError("missing key before '='", line_no, indent);
      const std::string field = section.empty() ? key : section + "." + key;
      const auto& allowed = schema().at(section);
      if (section != "parameters" && !allowed.contains(key))
        throw ConfigError("unknown key '" + field + "'", line_no, indent, field);
      if (value.empty())
        throw ConfigError("missing value for '" + field + "'", line_no, indent + eq + 1, field);
      const std::size_t value_col = indent + raw.substr(indent - 1).find(value, eq);
      if (entries_.contains(field))
        throw ConfigError("duplicate key '" + field + "'", line_no, indent, field);
      entries_[field] = Entry{value, {line_no, indent}, {line_no, value_col}};
      order_.push_back(field);
    }
  }

  const Entry* find(const std::string& field) const {
    const auto it = entries_.find(field);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool has(const std::string& field) const { return entries_.contains(field); }
  const std::vector<std::string>& order() const { return order_; }
  const Entry& at(const std::string& field) const { return entries_.at(field); }

 private:
  std::set<std::string> sections_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
};

[[noreturn]] void fail(const std::string& field, const std::string& message, const Document& doc) {
  if (const Entry* e = doc.find(field))
    throw ConfigError(field + ": " + message, e->key_at.line, e->key_at.column, field);
  throw ConfigError(field + ": " + message, 0, 0, field);
}

double to_double(const std::string& field, const Entry& e) {
  double out = 0.0;
  const char* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError(field + ": expected a number, got '" + e.value + "'", e.value_at.line,
                      e.value_at.column, field);
  return out;
}

std::size_t to_size(const std::string& field, const Entry& e) {
  std::size_t out = 0;
  const char* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(field + ": expected a nonnegative integer, got '" + e.value + "'",
                      e.value_at.line, e.value_at.column, field);
  return out;
}

bool to_bool(const std::string& field, const Entry& e) {
  const std::string v = lower(e.value);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(field + ": expected true or false", e.value_at.line, e.value_at.column, field);
}

Family to_family(const std::string& field, const Entry& e) {
  try {
    return parse_family(e.value);
  } catch (const DomainError& err) {
    throw ConfigError(field + ": " + err.what(), e.value_at.line, e.value_at.column, field);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double number_in(const std::string& field, const Entry& e, const std::string& token) {
  return to_double(field, Entry{token, e.key_at, e.value_at});
}

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string family_key(Family f) { return lower(std::string(family_name(f))); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  const Document doc(text);
  RunConfig c;

  auto get = [&](const std::string& field) { return doc.find(field); };

  const Entry* command = get("command");
  if (!command) throw ConfigError("missing required key 'command'", 0, 0, "command");
  const std::string cmd = lower(command->value);
  if (cmd == "optimize") c.command = Command::Optimize;
  else if (cmd == "efficiency") c.command = Command::Efficiency;
  else if (cmd == "scenario") c.command = Command::Scenario;
  else
    throw ConfigError("command: expected optimize, efficiency or scenario", command->value_at.line,
                      command->value_at.column, "command");

  if (const Entry* e = get("scenario")) c.scenario = lower(e->value);
  if (const Entry* e = get("output")) c.output_dir = e->value;

  // [model]
  if (const Entry* e = get("model.kind")) {
    const std::string k = lower(e->value);
    if (k == "fedorov") c.model.kind = ModelKind::Fedorov;
    else if (k == "binary") c.model.kind = ModelKind::Binary;
    else if (k == "weibull") c.model.kind = ModelKind::Weibull;
    else
      throw ConfigError("model.kind: expected fedorov, binary or weibull", e->value_at.line,
                        e->value_at.column, "model.kind");
  }
  if (const Entry* e = get("model.pair")) {
    const auto parts = split(e->value, '-');
    if (parts.size() != 2)
      throw ConfigError("model.pair: expected two families joined by '-', e.g. C-G",
                        e->value_at.line, e->value_at.column, "model.pair");
    c.model.pair = std::pair{to_family("model.pair", Entry{parts[0], e->key_at, e->value_at}),
                             to_family("model.pair", Entry{parts[1], e->key_at, e->value_at})};
  }
  if (const Entry* e = get("model.epsilon")) c.model.epsilon = to_double("model.epsilon", *e);
  if (const Entry* e = get("model.tau_max")) c.model.tau_max = to_double("model.tau_max", *e);
  if (const Entry* e = get("model.alpha2")) c.model.alpha2 = to_double("model.alpha2", *e);
  if (const Entry* e = get("model.x_max")) c.model.x_max = to_double("model.x_max", *e);
  if (const Entry* e = get("model.dependence")) {
    const std::string d = lower(e->value);
    if (d == "marshall_olkin") c.model.marshall_olkin = true;
    else if (d == "khoudraji_clayton") c.model.marshall_olkin = false;
    else
      throw ConfigError("model.dependence: expected marshall_olkin or khoudraji_clayton",
                        e->value_at.line, e->value_at.column, "model.dependence");
  }
  if (const Entry* e = get("model.quadrature_order"))
    c.model.quadrature_order = to_size("model.quadrature_order", *e);

  // [copula]
  if (const Entry* e = get("copula.family")) c.copula.family = to_family("copula.family", *e);
  if (const Entry* e = get("copula.alpha1")) c.copula.alpha1 = to_double("copula.alpha1", *e);
  if (const Entry* e = get("copula.mix_family")) {
    c.copula.family2 = to_family("copula.mix_family", *e);
    if (!doc.has("copula.mix_weight")) fail("copula.mix_weight", "required with mix_family", doc);
  }
  if (const Entry* e = get("copula.mix_alpha1")) c.copula.alpha1_2 = to_double("copula.mix_alpha1", *e);
  if (const Entry* e = get("copula.mix_weight")) c.copula.weight2 = to_double("copula.mix_weight", *e);
  if (doc.has("copula.khoudraji_alpha2") || doc.has("copula.khoudraji_alpha3")) {
    double a2 = 0.0;
    double a3 = 0.0;
    if (const Entry* e = get("copula.khoudraji_alpha2")) a2 = to_double("copula.khoudraji_alpha2", *e);
    if (const Entry* e = get("copula.khoudraji_alpha3")) a3 = to_double("copula.khoudraji_alpha3", *e);
    c.copula.khoudraji = std::pair{a2, a3};
  }

  // [criterion]
  if (const Entry* e = get("criterion.kind")) {
    const std::string k = lower(e->value);
    if (k == "d") c.criterion.kind = CriterionKind::D;
    else if (k == "ds") c.criterion.kind = CriterionKind::Ds;
    else if (k == "da") c.criterion.kind = CriterionKind::DA;
    else
      throw ConfigError("criterion.kind: expected D, DA or Ds", e->value_at.line,
                        e->value_at.column, "criterion.kind");
  }
  if (const Entry* e = get("criterion.s")) c.criterion.s = to_size("criterion.s", *e);
  if (const Entry* e = get("criterion.A")) {
    for (const auto& row : split(e->value, ';')) {
      std::vector<double> values;
      std::istringstream in(row);
      std::string tok;
      while (in >> tok) {
        for (const auto& piece : split(tok, ','))
          if (!piece.empty()) values.push_back(number_in("criterion.A", *e, piece));
      }
      c.criterion.a.push_back(std::move(values));
    }
  }

  // [optimizer]
  if (const Entry* e = get("optimizer.grid")) c.optimizer.grid = to_size("optimizer.grid", *e);
  if (const Entry* e = get("optimizer.delta")) c.optimizer.delta = to_double("optimizer.delta", *e);
  if (const Entry* e = get("optimizer.weight_floor"))
    c.optimizer.weight_floor = to_double("optimizer.weight_floor", *e);
  if (const Entry* e = get("optimizer.max_iterations"))
    c.optimizer.max_iterations = to_size("optimizer.max_iterations", *e);
  if (const Entry* e = get("optimizer.polish")) c.optimizer.polish = to_bool("optimizer.polish", *e);
  if (const Entry* e = get("optimizer.refine_factor"))
    c.optimizer.refine_factor = to_size("optimizer.refine_factor", *e);

  // [parameters] and [design]
  for (const auto& field : doc.order()) {
    if (field.rfind("parameters.", 0) == 0)
      c.parameters.emplace_back(field.substr(11), to_double(field, doc.at(field)));
  }
  if (const Entry* e = get("design.support")) {
    for (const auto& item : split(e->value, ',')) {
      const auto xw = split(item, ':');
      if (xw.size() != 2)
        throw ConfigError("design.support: expected 'x:weight' items separated by commas",
                          e->value_at.line, e->value_at.column, "design.support");
      c.design.emplace_back(number_in("design.support", *e, xw[0]),
                            number_in("design.support", *e, xw[1]));
    }
  }

  // Semantic validation.
  const auto& o = c.optimizer;
  if (o.grid < 2) fail("optimizer.grid", "must be at least 2", doc);
  if (!(o.delta > 0.0)) fail("optimizer.delta", "must be positive", doc);
  if (!(o.weight_floor >= 0.0 && o.weight_floor < 1.0)) fail("optimizer.weight_floor", "must lie in [0,1)", doc);
  if (o.max_iterations < 1) fail("optimizer.max_iterations", "must be at least 1", doc);
  if (o.refine_factor < 1) fail("optimizer.refine_factor", "must be at least 1", doc);

  if (c.command == Command::Scenario) {
    static const std::set<std::string> names{"fedorov", "binary_tables", "weibull"};
    if (!names.contains(c.scenario))
      fail("scenario", "expected fedorov, binary_tables or weibull", doc);
    return c;
  }
  if (!doc.has("model.kind")) fail("model.kind", "required for " + cmd, doc);
  if (!doc.has("criterion.kind")) fail("criterion.kind", "required for " + cmd, doc);

  auto check = [&](const std::string& field, auto&& action) {
    try {
      action();
    } catch (const DomainError& err) {
      fail(field, err.what(), doc);
    }
  };
  if (c.copula.family != Family::Product)
    check("copula.alpha1", [&] { (void)BaseCopula(c.copula.family, c.copula.alpha1); });
  if (c.copula.family2 && *c.copula.family2 != Family::Product)
    check("copula.mix_alpha1", [&] { (void)BaseCopula(*c.copula.family2, c.copula.alpha1_2); });
  if (c.copula.family2 && !(c.copula.weight2 >= 0.0 && c.copula.weight2 <= 1.0))
    fail("copula.mix_weight", "mixture weight must lie in [0,1]", doc);
  if (c.copula.khoudraji) {
    const auto [a2, a3] = *c.copula.khoudraji;
    if (!(a2 >= 0.0 && a2 <= 1.0)) fail("copula.khoudraji_alpha2", "must lie in [0,1]", doc);
    if (!(a3 >= 0.0 && a3 <= 1.0)) fail("copula.khoudraji_alpha3", "must lie in [0,1]", doc);
    if (c.copula.family2) fail("copula.mix_family", "cannot combine a mixture with a Khoudraji transform", doc);
  }
  if (c.model.kind == ModelKind::Binary && c.model.pair) {
    check("model.tau_max",
          [&] { (void)TauLink::calibrated(c.model.epsilon, c.model.tau_max, c.model.x_max); });
    if (!(c.model.alpha2 >= 0.0 && c.model.alpha2 <= 1.0)) fail("model.alpha2", "must lie in [0,1]", doc);
  }
  std::unique_ptr<OutcomeModel> model;
  check(c.model.kind == ModelKind::Binary ? "model.pair" : "copula.family",
        [&] { model = build_model(c); });
  const std::size_t dim = model->dimension();
  if (c.criterion.kind == CriterionKind::Ds) {
    if (c.criterion.s < 1) fail("criterion.s", "must be at least 1", doc);
    if (c.criterion.s >= dim)
      fail("criterion.s",
           "subset must be a strict subset (s = " + std::to_string(c.criterion.s) +
               ", model has " + std::to_string(dim) + " parameters)",
           doc);
  }
  if (c.criterion.kind == CriterionKind::DA) {
    try {
      build_criterion(c.criterion).validate(dim);
    } catch (const DomainError& err) {
      fail("criterion.A", err.what(), doc);
    }
  }
  const auto names = model->parameter_names();
  for (const auto& [name, value] : c.parameters)
    if (std::find(names.begin(), names.end(), name) == names.end())
      fail("parameters." + name, "not a parameter of " + model->name(), doc);
  if (c.command == Command::Efficiency) {
    if (c.design.empty()) fail("design.support", "required for efficiency", doc);
    std::vector<double> xs;
    std::vector<double> ws;
    for (const auto& [x, w] : c.design) {
      xs.push_back(x);
      ws.push_back(w);
      if (!(x >= model->design_space().lo && x <= model->design_space().hi))
        fail("design.support", "point outside the design space", doc);
    }
    try {
      (void)Design(xs, ws);
    } catch (const DomainError& err) {
      fail("design.support", err.what(), doc);
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", 0, 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render(const RunConfig& c) {
  std::ostringstream os;
  switch (c.command) {
    case Command::Optimize: os << "command = optimize\n"; break;
    case Command::Efficiency: os << "command = efficiency\n"; break;
    case Command::Scenario: os << "command = scenario\n"; break;
  }
  if (!c.scenario.empty()) os << "scenario = " << c.scenario << '\n';
  os << "output = " << c.output_dir << '\n';

  os << "\n[model]\n";
  switch (c.model.kind) {
    case ModelKind::Fedorov: os << "kind = fedorov\n"; break;
    case ModelKind::Binary: os << "kind = binary\n"; break;
    case ModelKind::Weibull: os << "kind = weibull\n"; break;
  }
  if (c.model.pair)
    os << "pair = " << family_key(c.model.pair->first) << '-' << family_key(c.model.pair->second) << '\n';
  os << "epsilon = " << fmt(c.model.epsilon) << '\n'
     << "tau_max = " << fmt(c.model.tau_max) << '\n'
     << "alpha2 = " << fmt(c.model.alpha2) << '\n'
     << "x_max = " << fmt(c.model.x_max) << '\n'
     << "dependence = " << (c.model.marshall_olkin ? "marshall_olkin" : "khoudraji_clayton") << '\n'
     << "quadrature_order = " << c.model.quadrature_order << '\n';

  os << "\n[copula]\n"
     << "family = " << family_key(c.copula.family) << '\n'
     << "alpha1 = " << fmt(c.copula.alpha1) << '\n';
  if (c.copula.family2) os << "mix_family = " << family_key(*c.copula.family2) << '\n';
  os << "mix_alpha1 = " << fmt(c.copula.alpha1_2) << '\n'
     << "mix_weight = " << fmt(c.copula.weight2) << '\n';
  if (c.copula.khoudraji)
    os << "khoudraji_alpha2 = " << fmt(c.copula.khoudraji->first) << '\n'
       << "khoudraji_alpha3 = " << fmt(c.copula.khoudraji->second) << '\n';

  os << "\n[criterion]\n";
  switch (c.criterion.kind) {
    case CriterionKind::D: os << "kind = D\n"; break;
    case CriterionKind::Ds: os << "kind = Ds\n"; break;
    case CriterionKind::DA: os << "kind = DA\n"; break;
  }
  os << "s = " << c.criterion.s << '\n';
  if (!c.criterion.a.empty()) {
    os << "A = ";
    for (std::size_t r = 0; r < c.criterion.a.size(); ++r) {
      if (r) os << "; ";
      for (std::size_t k = 0; k < c.criterion.a[r].size(); ++k)
        os << (k ? " " : "") << fmt(c.criterion.a[r][k]);
    }
    os << '\n';
  }

  os << "\n[optimizer]\n"
     << "grid = " << c.optimizer.grid << '\n'
     << "delta = " << fmt(c.optimizer.delta) << '\n'
     << "weight_floor = " << fmt(c.optimizer.weight_floor) << '\n'
     << "max_iterations = " << c.optimizer.max_iterations << '\n'
     << "polish = " << (c.optimizer.polish ? "true" : "false") << '\n'
     << "refine_factor = " << c.optimizer.refine_factor << '\n';

  if (!c.parameters.empty()) {
    os << "\n[parameters]\n";
    for (const auto& [name, value] : c.parameters) os << name << " = " << fmt(value) << '\n';
  }
  if (!c.design.empty()) {
    os << "\n[design]\nsupport = ";
    for (std::size_t i = 0; i < c.design.size(); ++i)
      os << (i ? ", " : "") << fmt(c.design[i].first) << ':' << fmt(c.design[i].second);
    os << '\n';
  }
  return os.str();
}

CopulaSpec build_copula(const CopulaConfig& c) {
  const BaseCopula base = c.family == Family::Product ? BaseCopula::product()
                                                      : BaseCopula(c.family, c.alpha1);
  if (c.family2) {
    const BaseCopula second = *c.family2 == Family::Product ? BaseCopula::product()
                                                            : BaseCopula(*c.family2, c.alpha1_2);
    if (!(c.weight2 >= 0.0 && c.weight2 <= 1.0))
      throw DomainError("mixture weight must lie in [0,1]");
    if (c.khoudraji) throw DomainError("a Khoudraji transform applies to a single family only");
    return MixtureCopula({{base, 1.0 - c.weight2}, {second, c.weight2}});
  }
  if (c.khoudraji) return KhoudrajiCopula(base, c.khoudraji->first, c.khoudraji->second);
  return base;
}

std::unique_ptr<OutcomeModel> build_model(const RunConfig& c) {
  switch (c.model.kind) {
    case ModelKind::Fedorov: {
      if (c.copula.family2 || c.copula.khoudraji)
        throw DomainError("the fedorov model takes a single copula family");
      const BaseCopula base = c.copula.family == Family::Product
                                  ? BaseCopula::product()
                                  : BaseCopula(c.copula.family, c.copula.alpha1);
      return std::make_unique<FedorovModel>(base, c.model.quadrature_order);
    }
    case ModelKind::Binary:
      if (c.model.pair) {
        const TauLink link = TauLink::calibrated(c.model.epsilon, c.model.tau_max, c.model.x_max);
        return std::make_unique<BinaryLogitModel>(
            BinaryLogitModel::mixture(c.model.pair->first, c.model.pair->second, link, c.model.alpha2));
      }
      return std::make_unique<BinaryLogitModel>(
          BinaryLogitModel::fixed(build_copula(c.copula), c.model.x_max));
    case ModelKind::Weibull:
      if (c.model.marshall_olkin) return std::make_unique<WeibullModel>(WeibullModel::marshall_olkin());
      if (c.copula.family != Family::Clayton || !c.copula.khoudraji)
        throw DomainError("khoudraji_clayton dependence needs a Clayton copula with khoudraji_alpha2/3");
      return std::make_unique<WeibullModel>(WeibullModel::khoudraji_clayton(
          c.copula.alpha1, c.copula.khoudraji->first, c.copula.khoudraji->second));
  }
  throw DomainError("unknown model kind");
}

CriterionSpec build_criterion(const CriterionConfig& c) {
  switch (c.kind) {
    case CriterionKind::D: return CriterionSpec::d();
    case CriterionKind::Ds: return CriterionSpec::ds(c.s);
    case CriterionKind::DA: {
      if (c.a.empty() || c.a.front().empty()) throw DomainError("D_A needs a contrast matrix A");
      Eigen::MatrixXd a(static_cast<Eigen::Index>(c.a.size()),
                        static_cast<Eigen::Index>(c.a.front().size()));
      for (std::size_t r = 0; r < c.a.size(); ++r) {
        if (c.a[r].size() != c.a.front().size()) throw DomainError("rows of A differ in length");
        for (std::size_t k = 0; k < c.a[r].size(); ++k)
          a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = c.a[r][k];
      }
      return CriterionSpec::da(std::move(a));
    }
  }
  throw DomainError("unknown criterion kind");
}

ParamVector build_parameters(const RunConfig& c, const OutcomeModel& model) {
  ParamVector p = model.nominal();
  for (const auto& [name, value] : c.parameters) p = p.with(name, value);
  return p;
}

OptimizerConfig build_optimizer(const OptimizerSettings& s) {
  OptimizerConfig o;
  o.delta = s.delta;
  o.weight_floor = s.weight_floor;
  o.max_iterations = s.max_iterations;
  o.polish = s.polish;
  o.refine_factor = s.refine_factor;
  return o;
}

}  // namespace copula_oed
