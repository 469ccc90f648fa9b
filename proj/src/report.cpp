#include "fnolab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>

#include "json.hpp"

#include "fnolab/csv.hpp"

namespace fnolab {

using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
    return s;
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

const char* const kPalette[8] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& rows) {
    csv::Table t;
    t.header.assign(ResultsCsv::kHeader, ResultsCsv::kHeader + 7);
    for (const CurvePoint& p : rows)
        t.rows.push_back({p.system, p.mode, p.model_id, std::to_string(p.n_examples),
                          std::to_string(p.seed), format_double(p.lr),
                          format_double(p.test_error)});
    csv::write_file(path.string(), t);
}

std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("curve csv: no such file " + path.string());
    return ResultsCsv(path).rows();
}

void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<SeedAggregate>& rows) {
    csv::Table t;
    t.header = {"system", "mode", "model_id", "n_examples", "n_seeds", "mean", "q1", "median",
                "q3"};
    for (const SeedAggregate& a : rows)
        t.rows.push_back({a.system, a.mode, a.model_id, std::to_string(a.n_examples),
                          std::to_string(a.n_seeds), format_double(a.mean), format_double(a.q1),
                          format_double(a.median), format_double(a.q3)});
    csv::write_file(path.string(), t);
}

void write_equivalence_csv(const std::filesystem::path& path, const std::vector<EquivRow>& rows) {
    csv::Table t;
    t.header = {"n_tl", "tl_error", "n_scratch_equivalent", "exceeds"};
    for (const EquivRow& r : rows)
        t.rows.push_back({std::to_string(r.n_tl), format_double(r.tl_error),
                          r.exceeds ? std::string() : format_double(r.n_equiv),
                          r.exceeds ? "true" : "false"});
    csv::write_file(path.string(), t);
}

void write_curve_svg(const std::filesystem::path& path, const std::vector<CurvePoint>& rows,
                     const std::string& title) {
    // series in first-seen order; each holds per-size samples and baselines
    using Key = std::tuple<std::string, std::string, std::string>;
    struct Series {
        std::string label;
        std::map<int, std::vector<double>> by_n;  // n > 0
        std::vector<double> baseline;             // n = 0
    };
    std::vector<Key> order;
    std::map<Key, Series> series;
    for (const CurvePoint& p : rows) {
        Key k{p.system, p.mode, p.model_id};
        auto [it, fresh] = series.try_emplace(k);
        if (fresh) {
            order.push_back(k);
            it->second.label = p.system + " " + p.mode + " " + p.model_id;
        }
        if (p.n_examples > 0)
            it->second.by_n[p.n_examples].push_back(p.test_error);
        else
            it->second.baseline.push_back(p.test_error);
    }

    // log-log bounds over all finite positive data
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool any_x = false, any_y = false;
    auto fold_y = [&](double e) {
        if (!(e > 0) || !std::isfinite(e)) return;
        const double ly = std::log10(e);
        if (!any_y || ly < ymin) ymin = ly;
        if (!any_y || ly > ymax) ymax = ly;
        any_y = true;
    };
    for (const CurvePoint& p : rows) {
        fold_y(p.test_error);
        if (p.n_examples > 0) {
            const double lx = std::log10(static_cast<double>(p.n_examples));
            if (!any_x || lx < xmin) xmin = lx;
            if (!any_x || lx > xmax) xmax = lx;
            any_x = true;
        }
    }
    if (!any_x) xmin = 0, xmax = 1;
    if (!any_y) ymin = -1, ymax = 0;
    if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
    if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
    xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;

    const double pl = 70, pr = 700, pt = 45, pb = 460;  // plot box
    auto X = [&](double lx) { return pl + (lx - xmin) / (xmax - xmin) * (pr - pl); };
    auto Y = [&](double ly) { return pb - (ly - ymin) / (ymax - ymin) * (pb - pt); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"520\" "
         "viewBox=\"0 0 720 520\">\n";
    s += "<rect width=\"720\" height=\"520\" fill=\"white\"/>\n";
    s += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" +
         svg_escape(title) + "</text>\n";
    // axes box
    s += "<rect x=\"" + format_double(pl) + "\" y=\"" + format_double(pt) + "\" width=\"" +
         format_double(pr - pl) + "\" height=\"" + format_double(pb - pt) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    // decade gridlines and labels
    for (int k = static_cast<int>(std::ceil(xmin)); k <= static_cast<int>(std::floor(xmax));
         ++k) {
        const double x = X(k);
        s += "<line x1=\"" + format_double(x) + "\" y1=\"" + format_double(pt) + "\" x2=\"" +
             format_double(x) + "\" y2=\"" + format_double(pb) +
             "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(pb + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1e" +
             std::to_string(k) + "</text>\n";
    }
    for (int k = static_cast<int>(std::ceil(ymin)); k <= static_cast<int>(std::floor(ymax));
         ++k) {
        const double y = Y(k);
        s += "<line x1=\"" + format_double(pl) + "\" y1=\"" + format_double(y) + "\" x2=\"" +
             format_double(pr) + "\" y2=\"" + format_double(y) +
             "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + format_double(pl - 6) + "\" y=\"" + format_double(y + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" +
             std::to_string(k) + "</text>\n";
    }
    s += "<text x=\"385\" y=\"500\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">downstream examples</text>\n";
    s += "<text x=\"18\" y=\"252\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 252)\">test error (mu_l2)</text>\n";

    int si = 0;
    for (const Key& k : order) {
        const Series& sr = series[k];
        const char* color = kPalette[si % 8];
        // per-seed points
        for (const auto& [n, errs] : sr.by_n)
            for (double e : errs) {
                if (!(e > 0)) continue;
                s += "<circle cx=\"" + format_double(X(std::log10(double(n)))) + "\" cy=\"" +
                     format_double(Y(std::log10(e))) + "\" r=\"2.5\" fill=\"" + color +
                     "\" fill-opacity=\"0.5\"/>\n";
            }
        // median polyline
        std::string pts;
        for (const auto& [n, errs] : sr.by_n) {
            const double med = quantile_linear(errs, 0.5);
            if (!(med > 0)) continue;
            if (!pts.empty()) pts += ' ';
            pts += format_double(X(std::log10(double(n)))) + "," +
                   format_double(Y(std::log10(med)));
        }
        if (!pts.empty())
            s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                 "\" stroke-width=\"2\"/>\n";
        // zero-shot / untrained baseline
        if (!sr.baseline.empty()) {
            const double med = quantile_linear(sr.baseline, 0.5);
            if (med > 0) {
                const double y = Y(std::log10(med));
                s += "<line x1=\"" + format_double(pl) + "\" y1=\"" + format_double(y) +
                     "\" x2=\"" + format_double(pr) + "\" y2=\"" + format_double(y) +
                     "\" stroke=\"" + color +
                     "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
            }
        }
        // legend entry
        const double ly = pt + 14 + 16 * si;
        s += "<line x1=\"580\" y1=\"" + format_double(ly - 4) + "\" x2=\"600\" y2=\"" +
             format_double(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"604\" y=\"" + format_double(ly) +
             "\" font-family=\"sans-serif\" font-size=\"10\">" + svg_escape(sr.label) +
             "</text>\n";
        ++si;
    }
    s += "</svg>\n";

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << s;
    if (!os.flush()) throw IoError("failed writing " + path.string());
}

void write_field_ppm(const std::filesystem::path& path, const RealField& f) {
    if (f.h < 1 || f.w < 1) throw ConfigError("field image: empty field");
    double vmax = 0;
    for (double v : f.values) vmax = std::max(vmax, std::abs(v));
    // diverging blue-white-red about 0 (coolwarm endpoints)
    const double lo[3] = {59, 76, 192}, mid[3] = {221, 221, 221}, hi[3] = {180, 4, 38};
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(f.h) * f.w * 3);
    for (int i = 0; i < f.h; ++i)
        for (int j = 0; j < f.w; ++j) {
            const double t = vmax > 0 ? f.at(i, j) / vmax : 0.0;
            const double* a = mid;
            const double* b = t < 0 ? lo : hi;
            const double u = std::min(1.0, std::abs(t));
            for (int c = 0; c < 3; ++c)
                bytes += static_cast<char>(
                    static_cast<unsigned char>(std::lround(a[c] + u * (b[c] - a[c]))));
        }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << "P6\n" << f.w << ' ' << f.h << "\n255\n" << bytes;
    if (!os.flush()) throw IoError("failed writing " + path.string());
}

void emit_report(const ReportInputs& in, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    json summary;
    summary["schema"] = 1;
    summary["curves"] = json::array();
    summary["fields"] = json::array();
    json manifest;
    manifest["schema"] = 1;
    manifest["inputs"] = json::array();

    for (const auto& src : in.curve_csvs) {
        const std::string bytes = read_bytes(src);
        manifest["inputs"].push_back({{"path", src.string()},
                                      {"bytes", bytes.size()},
                                      {"fnv1a64", hex64(fnv1a64(bytes))}});
        const auto rows = read_curve_csv(src);
        const std::string stem = src.stem().string();
        const auto agg_path = out_dir / (stem + "_aggregate.csv");
        const auto svg_path = out_dir / (stem + ".svg");
        write_aggregate_csv(agg_path, aggregate_seeds(rows));
        write_curve_svg(svg_path, rows, stem);
        summary["curves"].push_back({{"source", src.string()},
                                     {"rows", rows.size()},
                                     {"aggregate", agg_path.filename().string()},
                                     {"figure", svg_path.filename().string()}});
    }
    for (const auto& [name, field] : in.fields) {
        const auto img_path = out_dir / (name + ".ppm");
        write_field_ppm(img_path, field);
        summary["fields"].push_back({{"name", name},
                                     {"file", img_path.filename().string()},
                                     {"h", field.h},
                                     {"w", field.w}});
    }
    {
        std::ofstream os(out_dir / "summary.json");
        if (!os) throw IoError("cannot write " + (out_dir / "summary.json").string());
        os << summary.dump(2) << '\n';
        if (!os.flush()) throw IoError("failed writing summary.json");
    }
    {
        std::ofstream os(out_dir / "manifest.json");
        if (!os) throw IoError("cannot write " + (out_dir / "manifest.json").string());
        os << manifest.dump(2) << '\n';
        if (!os.flush()) throw IoError("failed writing manifest.json");
    }
}

}  // namespace fnolab
