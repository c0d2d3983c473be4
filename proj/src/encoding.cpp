#include "bridgeord/encoding.hpp"

#include "bridgeord/errors.hpp"
#include "bridgeord/fileio.hpp"
#include "bridgeord/text.hpp"

#include <algorithm>

namespace bridgeord {
namespace {

struct Declaration {
  std::string column;
  std::string kind;
  std::vector<std::string> args;
  bool has_parens = false;
};

Declaration parse_line(std::string_view line, int line_no) {
  const auto fail = [&](const std::string& msg) {
    throw ValidationError("encoding line " + std::to_string(line_no) + ": " + msg);
  };
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) fail("expected 'column = type(options)'");
  Declaration d;
  d.column = std::string(text::trim(line.substr(0, eq)));
  if (d.column.empty()) fail("missing column name");
  auto rhs = text::trim(line.substr(eq + 1));
  const auto open = rhs.find('(');
  if (open == std::string_view::npos) {
    d.kind = std::string(rhs);
  } else {
    if (rhs.back() != ')') fail("unbalanced parentheses");
    d.has_parens = true;
    d.kind = std::string(text::trim(rhs.substr(0, open)));
    const auto inner = rhs.substr(open + 1, rhs.size() - open - 2);
    if (!text::trim(inner).empty()) {
      for (auto part : text::split(inner, ',')) {
        const auto arg = text::trim(part);
        if (arg.empty()) fail("empty option");
        d.args.emplace_back(arg);
      }
    }
  }
  return d;
}

}  // namespace

int OutcomeEncoding::code(std::string_view cell) const {
  const auto v = text::trim(cell);
  if (!labels.empty()) {
    const auto it = std::find(labels.begin(), labels.end(), v);
    if (it == labels.end()) throw ValidationError("unknown outcome label '" + std::string(v) + "'");
    return static_cast<int>(it - labels.begin()) + 1;
  }
  const long long y = text::parse_int(v, "outcome");
  if (y < 1 || y > n_categories) {
    throw ValidationError("outcome " + std::to_string(y) + " outside 1.." + std::to_string(n_categories));
  }
  return static_cast<int>(y);
}

int CovariateEncoding::width() const {
  return kind == Kind::numeric ? 1 : static_cast<int>(levels.size()) - 1;
}

std::vector<std::string> CovariateEncoding::design_names() const {
  if (kind == Kind::numeric) return {log ? "log(" + column + ")" : column};
  std::vector<std::string> out;
  for (const auto& l : levels) {
    if (l != reference) out.push_back(column + "=" + l);
  }
  return out;
}

int EncodingPlan::width() const {
  int w = 0;
  for (const auto& c : covariates) w += c.width();
  return w;
}

std::vector<std::string> EncodingPlan::design_names() const {
  std::vector<std::string> out;
  for (const auto& c : covariates) {
    for (auto& n : c.design_names()) out.push_back(std::move(n));
  }
  return out;
}

const CovariateEncoding* EncodingPlan::find(std::string_view column) const {
  for (const auto& c : covariates) {
    if (c.column == column) return &c;
  }
  return nullptr;
}

EncodingPlan EncodingPlan::parse(std::string_view body) {
  EncodingPlan plan;
  bool have_outcome = false;
  int line_no = 0;
  for (auto raw : text::split(body, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    const auto line = text::trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const Declaration d = parse_line(line, line_no);
    const auto fail = [&](const std::string& msg) {
      throw ValidationError("encoding line " + std::to_string(line_no) + " (" + d.column + "): " + msg);
    };
    if (d.column == "region" || d.column == "family") fail("reserved column name");
    if ((have_outcome && plan.outcome.column == d.column) || plan.find(d.column) != nullptr) {
      fail("column declared twice");
    }
    if (d.kind == "outcome") {
      if (have_outcome) fail("only one outcome column may be declared");
      have_outcome = true;
      plan.outcome.column = d.column;
      if (d.args.size() == 1 && std::all_of(d.args[0].begin(), d.args[0].end(), ::isdigit)) {
        plan.outcome.n_categories = static_cast<int>(text::parse_int(d.args[0], "category count"));
      } else {
        plan.outcome.labels = d.args;
        plan.outcome.n_categories = static_cast<int>(d.args.size());
      }
      if (plan.outcome.n_categories < 2) fail("an outcome needs at least 2 categories");
      continue;
    }
    CovariateEncoding c;
    c.column = d.column;
    if (d.kind == "numeric") {
      for (const auto& a : d.args) {
        if (a == "log") {
          c.log = true;
        } else if (a == "center") {
          c.center = true;
        } else {
          fail("unknown numeric option '" + a + "'");
        }
      }
    } else if (d.kind == "categorical") {
      c.kind = CovariateEncoding::Kind::categorical;
      for (auto level : d.args) {
        if (level.back() == '*') {
          level.pop_back();
          level = std::string(text::trim(level));
          if (!c.reference.empty()) fail("more than one reference level");
          c.reference = level;
        }
        if (std::find(c.levels.begin(), c.levels.end(), level) != c.levels.end()) {
          fail("level '" + level + "' listed twice");
        }
        c.levels.push_back(level);
      }
      if (c.levels.size() < 2) fail("a categorical column needs at least 2 levels");
      if (c.reference.empty()) fail("no reference level marked with '*'");
    } else {
      fail("unknown column type '" + d.kind + "'");
    }
    plan.covariates.push_back(std::move(c));
  }
  if (!have_outcome) throw ValidationError("encoding declares no outcome column");
  return plan;
}

EncodingPlan EncodingPlan::load(const std::string& path) { return parse(read_file(path)); }

std::string EncodingPlan::to_text() const {
  std::string out = outcome.column + " = outcome(";
  if (outcome.labels.empty()) {
    out += std::to_string(outcome.n_categories);
  } else {
    for (std::size_t i = 0; i < outcome.labels.size(); ++i) out += (i ? ", " : "") + outcome.labels[i];
  }
  out += ")\n";
  for (const auto& c : covariates) {
    out += c.column + " = ";
    if (c.kind == CovariateEncoding::Kind::numeric) {
      out += "numeric";
      if (c.log || c.center) {
        out += "(";
        out += c.log ? "log" : "";
        out += c.log && c.center ? ", " : "";
        out += c.center ? "center" : "";
        out += ")";
      }
    } else {
      out += "categorical(";
      for (std::size_t i = 0; i < c.levels.size(); ++i) {
        out += (i ? ", " : "") + c.levels[i] + (c.levels[i] == c.reference ? "*" : "");
      }
      out += ")";
    }
    out += "\n";
  }
  return out;
}

std::vector<double> encode(std::string_view value, const CovariateEncoding& column) {
  if (column.kind != CovariateEncoding::Kind::categorical) {
    throw ValidationError("column '" + column.column + "' is not categorical");
  }
  const auto v = text::trim(value);
  std::vector<double> out(static_cast<std::size_t>(column.width()), 0.0);
  std::size_t slot = 0;
  for (const auto& level : column.levels) {
    if (level == column.reference) {
      if (level == v) return out;
      continue;
    }
    if (level == v) {
      out[slot] = 1.0;
      return out;
    }
    ++slot;
  }
  throw ValidationError("unknown level '" + std::string(v) + "' for column '" + column.column + "'");
}

}  // namespace bridgeord
