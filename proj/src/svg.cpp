#include "abc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace abc {

namespace {

std::string f4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string header(double w, double h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f4(w) + "\" height=\"" + f4(h) +
           "\" viewBox=\"0 0 " + f4(w) + " " + f4(h) + "\">\n";
}

std::string rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = "") {
    return "<rect x=\"" + f4(x) + "\" y=\"" + f4(y) + "\" width=\"" + f4(w) + "\" height=\"" + f4(h) + "\" fill=\"" +
           fill + "\"" + extra + "/>\n";
}

std::string text(double x, double y, const std::string& s, int size = 12) {
    return "<text x=\"" + f4(x) + "\" y=\"" + f4(y) + "\" font-family=\"monospace\" font-size=\"" +
           std::to_string(size) + "\">" + s + "</text>\n";
}

// hsl with integer components keeps the output stable
std::string hsl(int h, int s, int l) {
    return "hsl(" + std::to_string(h) + "," + std::to_string(s) + "%," + std::to_string(l) + "%)";
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    std::string s = "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + f4(pts[i].first) + "," + f4(pts[i].second);
    return s + "\"/>\n";
}

}  // namespace

std::string svg_tower_bases(const StageParams& s) {
    const double S = 600, M = 30;
    std::ostringstream os;
    os << header(S + 2 * M, S + 2 * M);
    os << rect(M, M, S, S, "white", " stroke=\"black\"");
    // sector marks at multiples of 1/q and the 1/(2q^2) scale
    const long q = to_i64(s.q);
    for (long i = 1; i < q; ++i) {
        double x = M + S * double(i) / double(q);
        os << "<line x1=\"" << f4(x) << "\" y1=\"" << f4(M) << "\" x2=\"" << f4(x) << "\" y2=\"" << f4(M + S)
           << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4,4\"/>\n";
    }
    for (long i = 0; i <= 2 * q * q; ++i) {
        double x = M + S * double(i) / double(2 * q * q);
        os << "<line x1=\"" << f4(x) << "\" y1=\"" << f4(M + S) << "\" x2=\"" << f4(x) << "\" y2=\"" << f4(M + S + 5)
           << "\" stroke=\"black\"/>\n";
    }
    const Rational W = Rational(2 * pow(s.l, s.d) * s.q * s.q);
    const Rational off = s.delta / W;
    for (TowerLabel lab : {TowerLabel::HTower, TowerLabel::HPlusOneTower}) {
        const bool first = lab == TowerLabel::HTower;
        TowerBase b = tilde_base(s, lab);
        // one label per i1 stripe, at the displayed start position
        for (long i1 = 0; i1 + 1 < q; ++i1) {
            Rational i(i1), qr(s.q), r(s.r), p(s.p);
            Rational start = first ? i * r / qr + i / (2 * qr * qr) + off
                                   : i * (r + p) / qr + Rational(1) / (2 * qr) + i / (2 * qr * qr) + off;
            double x = M + S * mod1(start).to_double();
            os << text(x, first ? M - 8 : M + S + 20, (first ? "A" : "B") + std::to_string(i1), 10);
        }
        for (const auto& bx : b.tilde(2)) {
            double x0 = bx.lo[0].to_double(), x1 = bx.hi[0].to_double();
            double y0 = bx.lo[1].to_double(), y1 = bx.hi[1].to_double();
            os << rect(M + S * x0, M + S * (1 - y1), S * (x1 - x0), S * (y1 - y0), first ? "#d62728" : "#1f77b4");
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<HPatternBlock> h_pattern(const HLayout& L) {
    std::vector<HPatternBlock> out;
    out.reserve(L.blocks());
    for (std::uint64_t row = 0; row < L.l; ++row)
        for (std::uint64_t x = 0; x < L.W; ++x) {
            HPatternBlock b;
            b.index = L.decode(x, row);
            b.from = L.box(b.index);
            b.to = L.box(L.image(b.index));
            out.push_back(std::move(b));
        }
    return out;
}

std::string svg_h_pattern(const HLayout& L) {
    const double S = 480, M = 20;
    std::ostringstream os;
    os << header(2 * S + 3 * M, S + 2 * M);
    const double ox[2] = {M, 2 * M + S};
    for (double o : ox) os << rect(o, M, S, S, "white", " stroke=\"black\"");
    const int hues[4] = {0, 220, 120, 50};  // red, blue, green, yellow
    for (const auto& b : h_pattern(L)) {
        int hue = hues[std::min<std::uint64_t>(b.index.e * 4 / (2 * L.q), 3)];
        int light = 80 - int(50 * b.index.f / std::max<std::uint64_t>(L.l - 1, 1));
        const std::string col = hsl(hue + int(b.index.e % 2) * 10, 70, light);
        const Box* bs[2] = {&b.from, &b.to};
        for (int k = 0; k < 2; ++k) {
            double x0 = bs[k]->lo[0].to_double(), x1 = bs[k]->hi[0].to_double();
            double y0 = bs[k]->lo[1].to_double(), y1 = bs[k]->hi[1].to_double();
            os << rect(ox[k] + S * x0, M + S * (1 - y1), S * (x1 - x0), S * (y1 - y0), col);
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_speed(const std::vector<SpeedReport>& rows) {
    const double Wd = 520, H = 360, M = 50;
    std::ostringstream os;
    os << header(Wd, H);
    os << rect(0, 0, Wd, H, "white");
    if (rows.empty()) {
        os << "</svg>\n";
        return os.str();
    }
    double lo = 1e300, hi = -1e300;
    auto lg = [](const Rational& r) { return std::log10(std::max(r.to_double(), 1e-300)); };
    for (const auto& r : rows)
        for (const Rational* v : {&r.ratio_bound, &r.ratio_finite, &r.cyclic_ratio}) {
            lo = std::min(lo, lg(*v));
            hi = std::max(hi, lg(*v));
        }
    if (hi - lo < 1) hi = lo + 1;
    auto X = [&](std::size_t i) { return M + (Wd - 2 * M) * (rows.size() > 1 ? double(i) / double(rows.size() - 1) : 0.5); };
    auto Y = [&](double v) { return H - M - (H - 2 * M) * (v - lo) / (hi - lo); };
    os << "<line x1=\"" << f4(M) << "\" y1=\"" << f4(H - M) << "\" x2=\"" << f4(Wd - M) << "\" y2=\"" << f4(H - M)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << f4(M) << "\" y1=\"" << f4(M) << "\" x2=\"" << f4(M) << "\" y2=\"" << f4(H - M)
       << "\" stroke=\"black\"/>\n";
    const char* names[3] = {"(h,h+1) bound", "(h,h+1) finite", "cyclic bound"};
    const char* cols[3] = {"#d62728", "#ff7f0e", "#1f77b4"};
    for (int k = 0; k < 3; ++k) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Rational& v = k == 0 ? rows[i].ratio_bound : k == 1 ? rows[i].ratio_finite : rows[i].cyclic_ratio;
            pts.push_back({X(i), Y(lg(v))});
        }
        os << polyline(pts, cols[k]);
        os << text(Wd - M - 150, M + 15.0 * k, names[k], 11);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) os << text(X(i) - 4, H - M + 16, "n=" + std::to_string(rows[i].n), 10);
    os << text(4, M - 10, "log10 ratio, " + f4(lo) + " .. " + f4(hi), 10);
    os << "</svg>\n";
    return os.str();
}

std::string svg_density(const SpectralDensity& s) {
    const double Wd = 520, H = 300, M = 40;
    std::ostringstream os;
    os << header(Wd, H);
    os << rect(0, 0, Wd, H, "white");
    if (s.density.empty()) {
        os << "</svg>\n";
        return os.str();
    }
    double hi = *std::max_element(s.density.begin(), s.density.end());
    double lo = std::min(0.0, *std::min_element(s.density.begin(), s.density.end()));
    if (hi - lo <= 0) hi = lo + 1;
    std::vector<std::pair<double, double>> pts;
    const double twopi = 6.283185307179586;
    for (std::size_t j = 0; j < s.density.size(); ++j)
        pts.push_back({M + (Wd - 2 * M) * s.theta[j] / twopi, H - M - (H - 2 * M) * (s.density[j] - lo) / (hi - lo)});
    os << polyline(pts, "#2ca02c");
    os << text(M, H - 12, "theta in [0, 2pi), mass " + f4(s.mass), 10);
    os << "</svg>\n";
    return os.str();
}

}  // namespace abc
