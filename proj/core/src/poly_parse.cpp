#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "doubling/polyalg.hpp"

namespace doubling {

namespace {

class Parser {
public:
    Parser(std::string text, int n) : s_(std::move(text)), n_(n) {}

    PolyC run() {
        if (s_.empty()) fail("empty expression");
        PolyC::TermMap terms;
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') sign = get() == '-' ? -1.0 : 1.0;
        while (true) {
            auto [alpha, c] = term();
            terms[alpha] += sign * c;
            if (at_end()) break;
            char op = get();
            if (op != '+' && op != '-') fail("expected '+' or '-'");
            sign = op == '-' ? -1.0 : 1.0;
        }
        return PolyC(n_, terms);
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("polynomial syntax error at offset " + std::to_string(pos_) + ": " + what);
    }
    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[pos_]; }
    char get() {
        if (at_end()) fail("unexpected end of input");
        return s_[pos_++];
    }

    double number() {
        const char* b = s_.data() + pos_;
        const char* e = s_.data() + s_.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr == b) fail("expected a number");
        pos_ += static_cast<std::size_t>(ptr - b);
        return v;
    }

    unsigned integer() {
        const char* b = s_.data() + pos_;
        const char* e = s_.data() + s_.size();
        unsigned v = 0;
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr == b) fail("expected an integer");
        pos_ += static_cast<std::size_t>(ptr - b);
        return v;
    }

    // (a+bi), (a-bi), (bi), (a), (i)
    Complex paren_complex() {
        get();  // '('
        Complex v = 0.0;
        bool any = false;
        double sign = 1.0;
        while (peek() != ')') {
            if (peek() == '+' || peek() == '-') {
                sign = get() == '-' ? -1.0 : 1.0;
            } else if (any && sign == 0.0) {
                fail("expected sign between parts of a complex literal");
            }
            double mag = 1.0;
            bool has_num = false;
            if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
                mag = number();
                has_num = true;
            }
            if (peek() == 'i') {
                get();
                v += Complex(0.0, sign * mag);
            } else if (has_num) {
                v += sign * mag;
            } else {
                fail("malformed complex literal");
            }
            any = true;
            sign = 0.0;
        }
        get();  // ')'
        if (!any) fail("empty parentheses");
        return v;
    }

    std::pair<MultiIndex, Complex> term() {
        MultiIndex alpha(n_, 0);
        Complex c = 1.0;
        bool any = false;
        while (true) {
            char ch = peek();
            if (ch == '(') {
                c *= paren_complex();
            } else if (ch == 'z') {
                get();
                unsigned k = integer();
                if (k < 1 || static_cast<int>(k) > n_)
                    throw ParseError("variable index z" + std::to_string(k) + " exceeds dimension " +
                                     std::to_string(n_));
                int e = 1;
                if (peek() == '^') {
                    get();
                    if (peek() == '-') throw ParseError("negative exponent");
                    e = static_cast<int>(integer());
                }
                alpha[k - 1] += e;
            } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
                double v = number();
                if (peek() == 'i') {
                    get();
                    c *= Complex(0.0, v);
                } else {
                    c *= v;
                }
            } else if (ch == 'i') {
                get();
                c *= Complex(0.0, 1.0);
            } else {
                fail(at_end() ? "expected a term" : std::string("unexpected character '") + ch + "'");
            }
            any = true;
            if (peek() != '*') break;
            get();
        }
        if (!any) fail("expected a term");
        return {alpha, c};
    }

    std::string s_;
    int n_;
    std::size_t pos_ = 0;
};

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

PolyC parse_poly(std::string_view text, int n) {
    if (n < 1 || n > kMaxDim) throw DomainError("polynomial dimension out of range");
    std::string compact;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) compact.push_back(ch);
    return Parser(std::move(compact), n).run();
}

PolyC parse_poly_json(std::string_view json_text, int n) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid polynomial document: ") + e.what());
    }
    if (!doc.is_array()) throw ParseError("polynomial document must be a list of terms");
    PolyC::TermMap terms;
    for (const auto& rec : doc) {
        if (!rec.is_object() || !rec.contains("exponents"))
            throw ParseError("term record needs an exponents field");
        MultiIndex alpha;
        for (const auto& e : rec.at("exponents")) {
            if (!e.is_number_integer()) throw ParseError("exponents must be integers");
            int v = e.get<int>();
            if (v < 0) throw ParseError("negative exponent");
            alpha.push_back(v);
        }
        if (static_cast<int>(alpha.size()) != n)
            throw ParseError("exponent list length does not match dimension");
        double re = rec.value("re", 0.0);
        double im = rec.value("im", 0.0);
        terms[alpha] += Complex(re, im);
    }
    return PolyC(n, terms);
}

std::string to_json(const PolyC& p) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [alpha, c] : p.terms())
        doc.push_back({{"exponents", alpha}, {"re", c.real()}, {"im", c.imag()}});
    return doc.dump();
}

std::string to_string(const PolyC& p) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [alpha, c] : p.terms()) {
        if (!first) out += " + ";
        first = false;
        out += "(" + format_double(c.real()) + (c.imag() < 0 ? "-" : "+") +
               format_double(std::abs(c.imag())) + "i)";
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            if (alpha[i] == 0) continue;
            out += "*z" + std::to_string(i + 1);
            if (alpha[i] > 1) out += "^" + std::to_string(alpha[i]);
        }
    }
    return out;
}

}  // namespace doubling
