#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fnolab/harness.hpp"

namespace fnolab {

// Curve table io on the pinned schema
// (system,mode,model_id,n_examples,seed,lr,test_error).
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& rows);
std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& path);

// system,mode,model_id,n_examples,n_seeds,mean,q1,median,q3
void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<SeedAggregate>& rows);

// n_tl,tl_error,n_scratch_equivalent,exceeds — exceeds rows leave the
// equivalent count empty (they are not plotted, per the source analysis).
void write_equivalence_csv(const std::filesystem::path& path, const std::vector<EquivRow>& rows);

// Log-log test-error-vs-examples figure: one polyline per
// (system, mode, model_id) series through the median across seeds, per-seed
// points as circles, n = 0 rows as dashed horizontal baselines. Pure function
// of the rows, so re-ingesting the CSV regenerates the bytes.
void write_curve_svg(const std::filesystem::path& path, const std::vector<CurvePoint>& rows,
                     const std::string& title);

// Binary PPM (P6), w x h pixels, symmetric blue-white-red diverging map
// about 0 scaled to max|f|.
void write_field_ppm(const std::filesystem::path& path, const RealField& f);

struct ReportInputs {
    std::vector<std::filesystem::path> curve_csvs;
    std::vector<std::pair<std::string, RealField>> fields;  // name -> image
};

// Renders the bundle into out_dir: per curve CSV an aggregate table and an
// SVG figure, per field a PPM, summary.json ("schema": 1) and manifest.json
// with FNV-1a 64 content hashes of every input file.
void emit_report(const ReportInputs& in, const std::filesystem::path& out_dir);

}  // namespace fnolab
