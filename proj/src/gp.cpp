#include "fblpower/gp.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace fblpower::gp {

Monomial& Monomial::operator*=(const Monomial& o) {
  coeff *= o.coeff;
  for (const auto& [v, e] : o.exps) {
    const double ne = exps[v] + e;
    if (ne == 0.0)
      exps.erase(v);
    else
      exps[v] = ne;
  }
  return *this;
}

Posynomial& Posynomial::operator+=(const Posynomial& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  return *this;
}

Posynomial operator*(const Posynomial& a, const Posynomial& b) {
  // merge products that land on the same exponent vector
  std::map<std::map<VarId, double>, double> acc;
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) {
      Monomial m = ta;
      m *= tb;
      acc[m.exps] += m.coeff;
    }
  Posynomial out;
  out.terms.reserve(acc.size());
  for (auto& [exps, coeff] : acc) {
    Monomial m(coeff);
    m.exps = exps;
    out.terms.push_back(std::move(m));
  }
  return out;
}

double eval(const Monomial& m, const Eigen::VectorXd& x) {
  double v = m.coeff;
  for (const auto& [var, e] : m.exps) v *= std::pow(x[var], e);
  return v;
}

double eval(const Posynomial& p, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (const auto& t : p.terms) v += eval(t, x);
  return v;
}

VarId GpProblem::add_variable(const std::string& name, double upper_bound) {
  if (by_name_.count(name)) throw std::invalid_argument("gp: duplicate variable '" + name + "'");
  const VarId v = static_cast<VarId>(names_.size());
  names_.push_back(name);
  upper_bounds_.push_back(upper_bound);
  by_name_[name] = v;
  return v;
}

VarId GpProblem::find_variable(const std::string& name) const {
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

void GpProblem::set_objective_exponent(VarId v, double e) { objective_exps_[v] = e; }

void GpProblem::add_constraint(Posynomial lhs, Monomial rhs, std::string label) {
  if (lhs.terms.empty()) throw std::invalid_argument("gp: empty constraint lhs");
  if (!(rhs.coeff > 0.0)) throw std::invalid_argument("gp: rhs coefficient must be > 0");
  for (const auto& t : lhs.terms)
    if (!(t.coeff > 0.0)) throw std::invalid_argument("gp: lhs coefficients must be > 0");
  constraints_.push_back({std::move(lhs), std::move(rhs), std::move(label)});
}

const Eigen::VectorXd GpProblem::objective() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_vars());
  for (const auto& [v, e] : objective_exps_) c[v] = e;
  return c;
}

LogForm log_transform(const GpProblem& p) {
  const int n = p.n_vars();
  LogForm lf;
  lf.obj = p.objective();
  for (const auto& con : p.constraints()) {
    LogConstraint lc;
    const auto t = static_cast<Eigen::Index>(con.lhs.terms.size());
    lc.rows.setZero(t, n);
    lc.offs.resize(t);
    for (Eigen::Index r = 0; r < t; ++r) {
      const Monomial& m = con.lhs.terms[r];
      for (const auto& [v, e] : m.exps) lc.rows(r, v) += e;
      for (const auto& [v, e] : con.rhs.exps) lc.rows(r, v) -= e;
      lc.offs[r] = std::log(m.coeff) - std::log(con.rhs.coeff);
    }
    lf.cons.push_back(std::move(lc));
  }
  for (int v = 0; v < n; ++v) {
    const double ub = p.upper_bounds()[v];
    if (ub > 0.0) {
      LogConstraint lc;
      lc.rows.setZero(1, n);
      lc.rows(0, v) = 1.0;
      lc.offs.resize(1);
      lc.offs[0] = -std::log(ub);
      lf.cons.push_back(std::move(lc));
    }
  }
  return lf;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "?";
}

GridResult grid_oracle(const GpProblem& p, int resolution,
                       const std::vector<std::pair<double, double>>& ranges) {
  const int n = p.n_vars();
  if (n > 5) throw std::invalid_argument("grid_oracle: supports at most 5 variables");
  if (n < 1 || resolution < 2) throw std::invalid_argument("grid_oracle: bad arguments");
  if (!ranges.empty() && static_cast<int>(ranges.size()) != n)
    throw std::invalid_argument("grid_oracle: ranges size mismatch");

  const Eigen::VectorXd c = p.objective();
  GridResult best;

  auto feasible_at = [&](const Eigen::VectorXd& x) {
    for (const auto& con : p.constraints())
      if (eval(con.lhs, x) > eval(con.rhs, x) * (1.0 + 1e-9)) return false;
    for (int v = 0; v < n; ++v) {
      const double ub = p.upper_bounds()[v];
      if (ub > 0.0 && x[v] > ub * (1.0 + 1e-9)) return false;
    }
    return true;
  };

  auto sweep = [&](const std::vector<std::pair<double, double>>& box) {
    std::vector<int> idx(n, 0);
    Eigen::VectorXd x(n);
    while (true) {
      for (int v = 0; v < n; ++v) {
        const auto [lo, hi] = box[v];
        x[v] = lo * std::pow(hi / lo, static_cast<double>(idx[v]) / (resolution - 1));
      }
      if (feasible_at(x)) {
        const double obj = c.dot(x.array().log().matrix());
        if (!best.feasible || obj > best.log_objective) {
          best.feasible = true;
          best.x = x;
          best.log_objective = obj;
        }
      }
      int v = 0;
      while (v < n && ++idx[v] == resolution) idx[v++] = 0;
      if (v == n) break;
    }
  };

  std::vector<std::pair<double, double>> box(n, {1e-6, 1e6});
  if (!ranges.empty()) box = ranges;
  for (auto& [lo, hi] : box)
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("grid_oracle: bad range");

  sweep(box);
  if (best.feasible) {
    // zoom to one grid step around the incumbent and sweep again
    std::vector<std::pair<double, double>> zoom(n);
    for (int v = 0; v < n; ++v) {
      const double step = std::pow(box[v].second / box[v].first, 1.0 / (resolution - 1));
      zoom[v] = {std::max(box[v].first, best.x[v] / step),
                 std::min(box[v].second, best.x[v] * step)};
      if (!(zoom[v].second > zoom[v].first)) zoom[v] = box[v];
    }
    sweep(zoom);
  }
  return best;
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void append_monomial(std::ostringstream& os, double coeff, const std::map<VarId, double>& exps,
                     const GpProblem& p) {
  bool lead = true;
  if (coeff != 1.0 || exps.empty()) {
    os << format_double(coeff);
    lead = false;
  }
  for (const auto& [v, e] : exps) {
    if (!lead) os << " * ";
    os << p.name(v);
    if (e != 1.0) os << "^" << format_double(e);
    lead = false;
  }
}

}  // namespace

std::string to_text(const GpProblem& p) {
  std::ostringstream os;
  os << "maximize";
  const Eigen::VectorXd c = p.objective();
  bool any = false;
  for (int v = 0; v < p.n_vars(); ++v) {
    if (c[v] != 0.0) {
      os << " " << (any ? "* " : "") << p.name(v);
      if (c[v] != 1.0) os << "^" << format_double(c[v]);
      any = true;
    }
  }
  if (!any) os << " 1";
  os << "\n";
  for (const auto& con : p.constraints()) {
    bool first = true;
    for (const auto& t : con.lhs.terms) {
      if (!first) os << " + ";
      append_monomial(os, t.coeff, t.exps, p);
      first = false;
    }
    os << " <= ";
    append_monomial(os, con.rhs.coeff, con.rhs.exps, p);
    os << "\n";
  }
  for (int v = 0; v < p.n_vars(); ++v)
    if (p.upper_bounds()[v] > 0.0)
      os << p.name(v) << " <= " << format_double(p.upper_bounds()[v]) << "\n";
  return os.str();
}

namespace {

struct Tok {
  enum Kind { number, name, plus, leq, end } kind = end;
  double num = 0.0;
  std::string text;
  double exp = 1.0;
};

// splits one line into factors/operators; '*' is whitespace-equivalent
std::vector<Tok> lex_line(const std::string& line, int lineno) {
  std::vector<Tok> out;
  std::size_t i = 0;
  auto err = [&](const std::string& what) {
    throw std::invalid_argument("gp text line " + std::to_string(lineno) + ": " + what);
  };
  while (i < line.size()) {
    const char ch = line[i];
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*') {
      ++i;
      continue;
    }
    if (ch == '+') {
      Tok t;
      t.kind = Tok::plus;
      out.push_back(t);
      ++i;
      continue;
    }
    if (ch == '<') {
      if (i + 1 >= line.size() || line[i + 1] != '=') err("expected '<='");
      Tok t;
      t.kind = Tok::leq;
      out.push_back(t);
      i += 2;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') {
      char* endp = nullptr;
      const double v = std::strtod(line.c_str() + i, &endp);
      if (endp == line.c_str() + i) err("malformed number");
      Tok t;
      t.kind = Tok::number;
      t.num = v;
      i = endp - line.c_str();
      out.push_back(t);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_'))
        ++j;
      Tok t;
      t.kind = Tok::name;
      t.text = line.substr(i, j - i);
      i = j;
      if (i < line.size() && line[i] == '^') {
        char* endp = nullptr;
        t.exp = std::strtod(line.c_str() + i + 1, &endp);
        if (endp == line.c_str() + i + 1) err("malformed exponent");
        i = endp - line.c_str();
      }
      out.push_back(t);
      continue;
    }
    err(std::string("unexpected character '") + ch + "'");
  }
  return out;
}

}  // namespace

GpProblem from_text(const std::string& text) {
  GpProblem p;
  auto var = [&p](const std::string& name) {
    const VarId v = p.find_variable(name);
    return v >= 0 ? v : p.add_variable(name);
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_objective = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    auto err = [&](const std::string& what) {
      throw std::invalid_argument("gp text line " + std::to_string(lineno) + ": " + what);
    };

    const auto first = line.find_first_not_of(" \t");
    if (line.compare(first, 8, "maximize") == 0) {
      if (have_objective) err("duplicate objective");
      const auto toks = lex_line(line.substr(first + 8), lineno);
      for (const auto& t : toks) {
        if (t.kind == Tok::name)
          p.set_objective_exponent(var(t.text), t.exp);
        else if (t.kind != Tok::number)  // stray constants are harmless in a product
          err("objective must be a product of variable powers");
      }
      have_objective = true;
      continue;
    }

    const auto toks = lex_line(line, lineno);
    // split at <=
    std::size_t split = toks.size();
    for (std::size_t i = 0; i < toks.size(); ++i)
      if (toks[i].kind == Tok::leq) split = i;
    if (split == toks.size()) err("constraint needs '<='");

    auto parse_side = [&](std::size_t from, std::size_t to) {
      Posynomial side;
      Monomial cur;
      bool in_term = false;
      for (std::size_t i = from; i < to; ++i) {
        const Tok& t = toks[i];
        if (t.kind == Tok::plus) {
          if (!in_term) err("stray '+'");
          side.terms.push_back(cur);
          cur = Monomial();
          in_term = false;
        } else if (t.kind == Tok::number) {
          if (!(t.num > 0.0)) err("coefficients must be > 0");
          cur.coeff *= t.num;
          in_term = true;
        } else if (t.kind == Tok::name) {
          cur *= Monomial(1.0, var(t.text), t.exp);
          in_term = true;
        } else {
          err("unexpected token");
        }
      }
      if (!in_term) err("empty side");
      side.terms.push_back(cur);
      return side;
    };

    const Posynomial lhs = parse_side(0, split);
    const Posynomial rhs = parse_side(split + 1, toks.size());
    if (rhs.terms.size() != 1) err("right side must be a single monomial");
    p.add_constraint(lhs, rhs.terms[0]);
  }
  return p;
}

}  // namespace fblpower::gp
