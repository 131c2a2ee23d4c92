#include "sclt/testfn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

namespace sclt {

namespace {
const cplx I(0.0, 1.0);
}

TestFunction::Grad TestFunction::gradient(cplx z) const {
    if (grad) return grad(z);
    const double h = fd_step;
    return {(value(z + h) - value(z - h)) / (2.0 * h), (value(z + I * h) - value(z - I * h)) / (2.0 * h)};
}

cplx TestFunction::lap(cplx z) const {
    if (laplacian) return laplacian(z);
    const double h = 1e-4;
    return (value(z + h) + value(z - h) + value(z + I * h) + value(z - I * h) - 4.0 * value(z)) / (h * h);
}

cplx TestFunction::dz(cplx z) const {
    const Grad g = gradient(z);
    return 0.5 * (g[0] - I * g[1]);
}

TestFunction zpow(int k) {
    require(k >= 0, ErrorCode::invalid_argument, "power must be nonnegative");
    TestFunction f;
    f.name = "z^" + std::to_string(k);
    f.value = [k](cplx z) { return std::pow(z, k); };
    f.grad = [k](cplx z) -> TestFunction::Grad {
        const cplx d = k == 0 ? cplx(0.0) : double(k) * std::pow(z, k - 1);
        return {d, I * d};
    };
    f.laplacian = [](cplx) { return cplx(0.0); };
    f.hint = Smoothness::analytic;
    return f;
}

TestFunction conjpow(int k) {
    require(k >= 0, ErrorCode::invalid_argument, "power must be nonnegative");
    TestFunction f;
    f.name = "conj(z)^" + std::to_string(k);
    f.value = [k](cplx z) { return std::pow(std::conj(z), k); };
    f.grad = [k](cplx z) -> TestFunction::Grad {
        const cplx d = k == 0 ? cplx(0.0) : double(k) * std::pow(std::conj(z), k - 1);
        return {d, -I * d};
    };
    f.laplacian = [](cplx) { return cplx(0.0); };
    f.hint = Smoothness::C2;
    return f;
}

TestFunction re_zpow(int k) {
    require(k >= 0, ErrorCode::invalid_argument, "power must be nonnegative");
    TestFunction f;
    f.name = "re(z^" + std::to_string(k) + ")";
    f.value = [k](cplx z) { return cplx(std::pow(z, k).real(), 0.0); };
    f.grad = [k](cplx z) -> TestFunction::Grad {
        const cplx d = k == 0 ? cplx(0.0) : double(k) * std::pow(z, k - 1);
        return {cplx(d.real(), 0.0), cplx(-d.imag(), 0.0)};
    };
    f.laplacian = [](cplx) { return cplx(0.0); };
    f.hint = Smoothness::C2_symmetric;
    return f;
}

TestFunction abs2() {
    TestFunction f;
    f.name = "abs2";
    f.value = [](cplx z) { return cplx(std::norm(z), 0.0); };
    f.grad = [](cplx z) -> TestFunction::Grad { return {2.0 * z.real(), 2.0 * z.imag()}; };
    f.laplacian = [](cplx) { return cplx(4.0); };
    f.hint = Smoothness::C2_symmetric;
    return f;
}

TestFunction constant(cplx c) {
    TestFunction f;
    f.name = "const(" + format_complex(c) + ")";
    f.value = [c](cplx) { return c; };
    f.grad = [](cplx) -> TestFunction::Grad { return {0.0, 0.0}; };
    f.laplacian = [](cplx) { return cplx(0.0); };
    f.hint = Smoothness::C2_symmetric;
    return f;
}

TestFunction bump(cplx c, double r) {
    require(r > 0.0, ErrorCode::invalid_argument, "bump radius must be positive");
    TestFunction f;
    f.name = "bump(" + format_complex(c) + "," + std::to_string(r) + ")";
    // phi(s) = exp(1 - 1/(1-s)), s = |z-c|^2 / r^2
    f.value = [c, r](cplx z) {
        const double s = std::norm(z - c) / (r * r);
        return s < 1.0 ? cplx(std::exp(1.0 - 1.0 / (1.0 - s))) : cplx(0.0);
    };
    f.grad = [c, r](cplx z) -> TestFunction::Grad {
        const double s = std::norm(z - c) / (r * r);
        if (s >= 1.0) return {0.0, 0.0};
        const double q = 1.0 / (1.0 - s);
        const double dphi = -std::exp(1.0 - q) * q * q;
        const cplx d = z - c;
        return {dphi * 2.0 * d.real() / (r * r), dphi * 2.0 * d.imag() / (r * r)};
    };
    f.laplacian = [c, r](cplx z) {
        const double s = std::norm(z - c) / (r * r);
        if (s >= 1.0) return cplx(0.0);
        const double q = 1.0 / (1.0 - s);
        const double phi = std::exp(1.0 - q);
        const double dphi = -phi * q * q;
        const double d2phi = phi * (q * q * q * q - 2.0 * q * q * q);
        return cplx(d2phi * 4.0 * s / (r * r) + dphi * 4.0 / (r * r));
    };
    f.hint = std::abs(c.imag()) == 0.0 ? Smoothness::C2_symmetric : Smoothness::C2;
    f.support_center = c;
    f.support_radius = r;
    return f;
}

TestFunction gauss(cplx c, double s) {
    require(s > 0.0, ErrorCode::invalid_argument, "gauss width must be positive");
    TestFunction f;
    f.name = "gauss(" + format_complex(c) + "," + std::to_string(s) + ")";
    const double s2 = s * s;
    f.value = [c, s2](cplx z) { return cplx(std::exp(-std::norm(z - c) / (2.0 * s2))); };
    f.grad = [c, s2](cplx z) -> TestFunction::Grad {
        const cplx d = z - c;
        const double v = std::exp(-std::norm(d) / (2.0 * s2));
        return {-v * d.real() / s2, -v * d.imag() / s2};
    };
    f.laplacian = [c, s2](cplx z) {
        const double r2 = std::norm(z - c);
        const double v = std::exp(-r2 / (2.0 * s2));
        return cplx(v * (r2 / (s2 * s2) - 2.0 / s2));
    };
    f.hint = std::abs(c.imag()) == 0.0 ? Smoothness::C2_symmetric : Smoothness::C2;
    // effective support for grid-based evaluation: exp(-40) relative
    f.support_center = c;
    f.support_radius = std::sqrt(80.0) * s;
    return f;
}

TestFunction psym(const TestFunction& f) {
    TestFunction g;
    g.name = "psym(" + f.name + ")";
    g.value = [f](cplx z) { return 0.5 * (f.value(z) + f.value(std::conj(z))); };
    g.grad = [f](cplx z) -> TestFunction::Grad {
        const TestFunction::Grad a = f.gradient(z);
        const TestFunction::Grad b = f.gradient(std::conj(z));
        return {0.5 * (a[0] + b[0]), 0.5 * (a[1] - b[1])};
    };
    if (!f.grad) g.grad = nullptr;  // keep the finite-difference flag visible
    g.laplacian = [f](cplx z) { return 0.5 * (f.lap(z) + f.lap(std::conj(z))); };
    g.hint = f.hint == Smoothness::analytic ? Smoothness::C2_symmetric : f.hint;
    if (f.hint == Smoothness::C2) g.hint = Smoothness::C2_symmetric;
    g.support_center = cplx(f.support_center.real(), 0.0);
    g.support_radius = f.support_radius + std::abs(f.support_center.imag());
    return g;
}

cplx parse_complex(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    require(!s.empty(), ErrorCode::config_error, "empty complex literal");
    static const std::string num = R"(([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?|[0-9]+\.))";
    static const std::regex re_full("^([+-]?" + num + ")([+-](?:" + num + ")?)[ij]$");
    static const std::regex re_real("^[+-]?" + num + "$");
    static const std::regex re_imag("^([+-]?(?:" + num + ")?)[ij]$");
    std::smatch m;
    auto coeff = [](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return std::stod(t);
    };
    if (std::regex_match(s, m, re_full)) return {std::stod(m[1].str()), coeff(m[3].str())};
    if (std::regex_match(s, m, re_real)) return {std::stod(s), 0.0};
    if (std::regex_match(s, m, re_imag)) return {0.0, coeff(m[1].str())};
    throw Error(ErrorCode::config_error, "cannot parse complex literal '" + text + "'");
}

std::string format_complex(cplx z, int precision) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*g%+.*gi", precision, z.real(), precision, z.imag());
    return buf;
}

namespace {

std::vector<std::string> split_args(const std::string& inner) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : inner) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

int parse_power(const std::string& s) {
    require(!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }),
            ErrorCode::config_error, "bad exponent '" + s + "'");
    return std::stoi(s);
}

}  // namespace

TestFunction parse_test_function(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    std::smatch m;
    if (s == "z") return zpow(1);
    if (s == "abs2" || s == "|z|^2") return abs2();
    if (std::regex_match(s, m, std::regex(R"(^z\^(\d+)$)"))) return zpow(parse_power(m[1]));
    if (std::regex_match(s, m, std::regex(R"(^conj\(z\)\^(\d+)$)"))) return conjpow(parse_power(m[1]));
    if (s == "conj(z)") return conjpow(1);
    if (std::regex_match(s, m, std::regex(R"(^re\(z\^(\d+)\)$)"))) return re_zpow(parse_power(m[1]));
    if (s == "re(z)") return re_zpow(1);
    if (std::regex_match(s, m, std::regex(R"(^(bump|gauss)\((.*)\)$)"))) {
        const auto args = split_args(m[2]);
        require(args.size() == 2, ErrorCode::config_error, m[1].str() + " takes two arguments");
        const cplx c = parse_complex(args[0]);
        double r = 0.0;
        try {
            r = std::stod(args[1]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::config_error, "bad radius '" + args[1] + "'");
        }
        return m[1] == "bump" ? bump(c, r) : gauss(c, r);
    }
    if (std::regex_match(s, m, std::regex(R"(^const\((.*)\)$)"))) return constant(parse_complex(m[1]));
    throw Error(ErrorCode::config_error, "unknown test function '" + text + "'");
}

}  // namespace sclt
