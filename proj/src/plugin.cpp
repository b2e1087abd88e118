#include "gnep/plugin.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>

namespace gnep {

ParseError::ParseError(std::string source, int line, int column, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

Polynomial::Polynomial(std::size_t vars, std::vector<Monomial> terms)
    : vars_(vars), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        if (t.exponents.size() != vars_)
            throw std::invalid_argument("Polynomial: exponent tuple length must equal variable count");
        for (int e : t.exponents)
            if (e < 0) throw std::invalid_argument("Polynomial: negative exponent");
    }
}

namespace {

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// Term value, differentiated once w.r.t. x_a and once w.r.t. x_b when given.
double monomial_value(const Monomial& t, const Vector& x, std::size_t a = SIZE_MAX,
                      std::size_t b = SIZE_MAX) {
    double r = t.coefficient;
    for (std::size_t j = 0; j < t.exponents.size(); ++j) {
        int e = t.exponents[j];
        if (j == a) {
            r *= e;
            --e;
        }
        if (j == b) {
            r *= e;
            --e;
        }
        if (e < 0) return 0.0;
        r *= ipow(x[static_cast<Eigen::Index>(j)], e);
    }
    return r;
}

}  // namespace

double Polynomial::value(const Vector& x) const {
    double s = 0.0;
    for (const auto& t : terms_) s += monomial_value(t, x);
    return s;
}

Vector Polynomial::gradient(const Vector& x) const {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(vars_));
    for (const auto& t : terms_)
        for (std::size_t j = 0; j < vars_; ++j)
            if (t.exponents[j] > 0) g[static_cast<Eigen::Index>(j)] += monomial_value(t, x, j);
    return g;
}

Matrix Polynomial::hessian(const Vector& x) const {
    const auto n = static_cast<Eigen::Index>(vars_);
    Matrix h = Matrix::Zero(n, n);
    for (const auto& t : terms_)
        for (std::size_t i = 0; i < vars_; ++i)
            for (std::size_t j = 0; j < vars_; ++j)
                if (t.exponents[i] > 0 && t.exponents[j] > 0)
                    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                        monomial_value(t, x, i, j);
    return h;
}

Polynomial Polynomial::canonical() const {
    std::map<std::vector<int>, double> merged;
    for (const auto& t : terms_) merged[t.exponents] += t.coefficient;
    std::vector<Monomial> out;
    for (const auto& [exps, c] : merged)
        if (c != 0.0) out.push_back({c, exps});
    return Polynomial(vars_, std::move(out));
}

bool Polynomial::structurally_equal(const Polynomial& other) const {
    if (vars_ != other.vars_) return false;
    const auto a = canonical().terms();
    const auto b = other.canonical().terms();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].coefficient != b[i].coefficient || a[i].exponents != b[i].exponents) return false;
    return true;
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos;
    int line;
    const std::string& source;

    int column() const { return static_cast<int>(pos) + 1; }
    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source, line, column(), msg); }
    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c) fail(std::string("expected '") + c + "'");
        ++pos;
    }
    double number() {
        skip_ws();
        const char* begin = text.data() + pos;
        const char* end = text.data() + text.size();
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr == begin) fail("expected a numeric coefficient");
        if (!std::isfinite(v)) fail("coefficient must be finite");
        pos += static_cast<std::size_t>(ptr - begin);
        return v;
    }
    int integer() {
        skip_ws();
        const char* begin = text.data() + pos;
        const char* end = text.data() + text.size();
        int v = 0;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr == begin) fail("expected a nonnegative integer exponent");
        if (v < 0) fail("exponent must be nonnegative");
        pos += static_cast<std::size_t>(ptr - begin);
        return v;
    }
};

Polynomial parse_polynomial(Cursor& cur, std::size_t vars) {
    std::vector<Monomial> terms;
    for (;;) {
        Monomial t;
        t.coefficient = cur.number();
        cur.expect('(');
        for (std::size_t j = 0; j < vars; ++j) {
            if (j > 0) cur.expect(',');
            t.exponents.push_back(cur.integer());
        }
        cur.skip_ws();
        if (cur.pos < cur.text.size() && cur.text[cur.pos] == ',')
            cur.fail("exponent tuple has more than " + std::to_string(vars) + " entries");
        cur.expect(')');
        terms.push_back(std::move(t));
        if (cur.done()) break;
        cur.expect('+');
    }
    return Polynomial(vars, std::move(terms));
}

struct PlayerText {
    std::optional<Polynomial> theta;
    std::vector<Polynomial> g;
    std::vector<Polynomial> h;
    int line = 0;
};

Constraints make_constraints(std::vector<Polynomial> polys, std::size_t off, std::size_t nv,
                             std::size_t n) {
    if (polys.empty()) return {};
    Constraints c;
    c.count = polys.size();
    c.value = [polys](const Vector& x) {
        Vector v(static_cast<Eigen::Index>(polys.size()));
        for (std::size_t i = 0; i < polys.size(); ++i) v[static_cast<Eigen::Index>(i)] = polys[i].value(x);
        return v;
    };
    c.gradients = [polys, n](const Vector& x) {
        Matrix jt(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(polys.size()));
        for (std::size_t i = 0; i < polys.size(); ++i) jt.col(static_cast<Eigen::Index>(i)) = polys[i].gradient(x);
        return jt;
    };
    c.hessian_rows = [polys, off, nv](const Vector& x) {
        std::vector<Matrix> rows;
        for (const auto& p : polys)
            rows.push_back(p.hessian(x).middleRows(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(nv)));
        return rows;
    };
    return c;
}

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

}  // namespace

PluginProblem parse_problem_plugin(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string name = "plugin";
    std::vector<std::size_t> dims;
    bool shared = false;
    std::vector<std::pair<std::string, std::vector<double>>> preset_text;
    std::vector<int> preset_lines;
    std::vector<PlayerText> players;

    int lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        std::string line = raw.substr(0, raw.find('#'));
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto kw_end = line.find_first_of(" \t\r", first);
        const std::string keyword = line.substr(first, kw_end == std::string::npos ? std::string::npos : kw_end - first);
        const std::size_t rest_pos = kw_end == std::string::npos ? line.size() : kw_end;
        const std::string rest = line.substr(rest_pos);
        const int kw_col = static_cast<int>(first) + 1;

        if (keyword == "name") {
            const auto words = split_words(rest);
            if (words.size() != 1) throw ParseError(source, lineno, kw_col, "name takes one word");
            name = words.front();
        } else if (keyword == "dims") {
            if (!players.empty()) throw ParseError(source, lineno, kw_col, "dims must precede players");
            dims.clear();
            Cursor cur{line, rest_pos, lineno, source};
            while (!cur.done()) {
                const int d = cur.integer();
                if (d < 1) cur.fail("player dimension must be >= 1");
                dims.push_back(static_cast<std::size_t>(d));
            }
            if (dims.empty()) throw ParseError(source, lineno, kw_col, "dims needs at least one player");
        } else if (keyword == "shared") {
            if (!split_words(rest).empty()) throw ParseError(source, lineno, kw_col, "shared takes no arguments");
            shared = true;
        } else if (keyword == "preset") {
            const auto words = split_words(rest);
            if (words.empty()) throw ParseError(source, lineno, kw_col, "preset needs a label");
            Cursor cur{line, rest_pos, lineno, source};
            cur.skip_ws();
            cur.pos += words.front().size();
            std::vector<double> values;
            while (!cur.done()) values.push_back(cur.number());
            preset_text.emplace_back(words.front(), std::move(values));
            preset_lines.push_back(lineno);
        } else if (keyword == "player") {
            if (dims.empty()) throw ParseError(source, lineno, kw_col, "dims must be declared before players");
            if (!split_words(rest).empty()) throw ParseError(source, lineno, kw_col, "player takes no arguments");
            if (players.size() == dims.size())
                throw ParseError(source, lineno, kw_col, "more player blocks than declared in dims");
            players.push_back({});
            players.back().line = lineno;
        } else if (keyword == "theta" || keyword == "g" || keyword == "h") {
            if (players.empty()) throw ParseError(source, lineno, kw_col, keyword + " outside a player block");
            std::size_t n = 0;
            for (std::size_t d : dims) n += d;
            Cursor cur{line, rest_pos, lineno, source};
            if (cur.done()) cur.fail("empty polynomial");
            Polynomial poly = parse_polynomial(cur, n);
            auto& p = players.back();
            if (keyword == "theta") {
                if (p.theta) throw ParseError(source, lineno, kw_col, "duplicate theta for player");
                p.theta = std::move(poly);
            } else if (keyword == "g") {
                p.g.push_back(std::move(poly));
            } else {
                p.h.push_back(std::move(poly));
            }
        } else {
            throw ParseError(source, lineno, kw_col, "unknown directive '" + keyword + "'");
        }
    }

    if (dims.empty()) throw ParseError(source, lineno, 1, "missing dims declaration");
    if (players.size() != dims.size())
        throw ParseError(source, lineno, 1,
                         "expected " + std::to_string(dims.size()) + " player blocks, found " +
                             std::to_string(players.size()));
    std::size_t n = 0;
    for (std::size_t d : dims) n += d;

    for (std::size_t v = 0; v < players.size(); ++v)
        if (!players[v].theta) throw ParseError(source, players[v].line, 1, "player block without theta");

    if (shared) {
        for (std::size_t v = 1; v < players.size(); ++v) {
            auto same = [](const std::vector<Polynomial>& a, const std::vector<Polynomial>& b) {
                if (a.size() != b.size()) return false;
                for (std::size_t i = 0; i < a.size(); ++i)
                    if (!a[i].structurally_equal(b[i])) return false;
                return true;
            };
            if (!same(players[v].g, players[0].g) || !same(players[v].h, players[0].h))
                throw ParseError(source, players[v].line, 1,
                                 "shared problem has constraint lists that differ between players");
        }
    }

    std::vector<PlayerSpec> specs;
    std::size_t off = 0;
    for (std::size_t v = 0; v < players.size(); ++v) {
        const std::size_t nv = dims[v];
        const Polynomial theta = *players[v].theta;
        PlayerSpec spec;
        spec.dim = nv;
        spec.objective.value = [theta](const Vector& x) { return theta.value(x); };
        spec.objective.gradient = [theta, off, nv](const Vector& x) -> Vector {
            return theta.gradient(x).segment(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(nv));
        };
        spec.objective.hessian_rows = [theta, off, nv](const Vector& x) -> Matrix {
            return theta.hessian(x).middleRows(static_cast<Eigen::Index>(off), static_cast<Eigen::Index>(nv));
        };
        spec.g = make_constraints(players[v].g, off, nv, n);
        spec.h = make_constraints(players[v].h, off, nv, n);
        specs.push_back(std::move(spec));
        off += nv;
    }

    PluginProblem out{GnepProblem(name, std::move(specs), shared), {}};
    for (std::size_t i = 0; i < preset_text.size(); ++i) {
        const auto& [label, values] = preset_text[i];
        if (values.size() != n)
            throw ParseError(source, preset_lines[i], 1,
                             "preset '" + label + "' has " + std::to_string(values.size()) +
                                 " values, expected " + std::to_string(n));
        out.presets[label] = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(n));
    }
    return out;
}

PluginProblem load_problem_plugin(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem_plugin(ss.str(), path);
}

}  // namespace gnep
