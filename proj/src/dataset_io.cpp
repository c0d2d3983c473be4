#include "bridgeord/dataset_io.hpp"

#include "bridgeord/errors.hpp"
#include "bridgeord/fileio.hpp"
#include "bridgeord/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace bridgeord {
namespace {

std::vector<std::string> covariate_columns(const Dataset& data) {
  std::vector<std::string> names = data.covariate_names;
  if (static_cast<int>(names.size()) != data.n_covariates()) {
    names.clear();
    for (int c = 0; c < data.n_covariates(); ++c) names.push_back("x" + std::to_string(c + 1));
  }
  return names;
}

}  // namespace

LoadResult parse_dataset(std::string_view body, const EncodingPlan& plan, const ModelSpec& spec) {
  if (plan.outcome.n_categories != spec.n_categories) {
    throw ValidationError("encoding declares " + std::to_string(plan.outcome.n_categories) +
                          " outcome categories but the model expects " + std::to_string(spec.n_categories));
  }
  if (plan.width() != spec.n_covariates) {
    throw ValidationError("encoding has design width " + std::to_string(plan.width()) +
                          " but the model expects " + std::to_string(spec.n_covariates));
  }
  auto lines = text::split(body, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ValidationError("dataset file is empty");

  auto strip_cr = [](std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
  };
  std::vector<std::string> header;
  for (auto h : text::split(strip_cr(lines[0]), ',')) header.emplace_back(text::trim(h));
  if (header.size() < 3 || header[0] != "region" || header[1] != "family" || header[2] != plan.outcome.column) {
    throw ValidationError("line 1: header must start with region,family," + plan.outcome.column);
  }
  // Map each declared covariate to its file column.
  std::vector<std::size_t> source(plan.covariates.size());
  for (std::size_t c = 0; c < plan.covariates.size(); ++c) {
    const auto it = std::find(header.begin() + 3, header.end(), plan.covariates[c].column);
    if (it == header.end()) {
      throw ValidationError("line 1: declared column '" + plan.covariates[c].column + "' is missing");
    }
    source[c] = static_cast<std::size_t>(it - header.begin());
  }
  for (std::size_t h = 3; h < header.size(); ++h) {
    if (plan.find(header[h]) == nullptr) {
      throw ValidationError("line 1: column '" + header[h] + "' is not declared in the encoding");
    }
  }

  struct Row {
    int region;
    int family;  // first-appearance family id, remapped below
    int y;
    std::vector<double> x;
  };
  std::vector<Row> rows;
  std::vector<std::string> region_labels;
  std::vector<std::string> family_labels;
  std::vector<int> family_region;
  std::unordered_map<std::string, int> region_index;
  std::unordered_map<std::string, int> family_index;
  LoadReport report;
  std::vector<long> outcome_counts(static_cast<std::size_t>(spec.n_categories), 0);
  std::vector<std::vector<long>> level_counts(plan.covariates.size());
  for (std::size_t c = 0; c < plan.covariates.size(); ++c) level_counts[c].assign(plan.covariates[c].levels.size(), 0);

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    const auto line = strip_cr(lines[li]);
    const auto fail = [&](const std::string& msg) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + msg);
    };
    if (text::trim(line).empty()) fail("blank line");
    const auto cells = text::split(line, ',');
    if (cells.size() != header.size()) {
      fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    for (std::size_t h = 0; h < cells.size(); ++h) {
      if (text::trim(cells[h]).empty()) fail("missing value in column '" + header[h] + "'");
    }
    const std::string region(text::trim(cells[0]));
    const std::string family(text::trim(cells[1]));
    auto [rit, new_region] = region_index.try_emplace(region, static_cast<int>(region_labels.size()));
    if (new_region) region_labels.push_back(region);
    auto [fit, new_family] = family_index.try_emplace(family, static_cast<int>(family_labels.size()));
    if (new_family) {
      family_labels.push_back(family);
      family_region.push_back(rit->second);
    } else if (family_region[static_cast<std::size_t>(fit->second)] != rit->second) {
      fail("family '" + family + "' appears under regions '" +
           region_labels[static_cast<std::size_t>(family_region[static_cast<std::size_t>(fit->second)])] +
           "' and '" + region + "'");
    }
    Row row;
    row.region = rit->second;
    row.family = fit->second;
    try {
      row.y = plan.outcome.code(cells[2]);
      for (std::size_t c = 0; c < plan.covariates.size(); ++c) {
        const auto& enc = plan.covariates[c];
        const auto cell = cells[source[c]];
        if (enc.kind == CovariateEncoding::Kind::categorical) {
          const auto v = encode(cell, enc);
          row.x.insert(row.x.end(), v.begin(), v.end());
          const auto lit = std::find(enc.levels.begin(), enc.levels.end(), text::trim(cell));
          ++level_counts[c][static_cast<std::size_t>(lit - enc.levels.begin())];
        } else {
          double x = text::parse_double(cell, enc.column);
          if (enc.log) {
            if (!(x > 0.0)) throw ValidationError("cannot take the log of " + std::string(text::trim(cell)) + " in column '" + enc.column + "'");
            x = std::log(x);
          }
          if (!std::isfinite(x)) throw ValidationError("non-finite value in column '" + enc.column + "'");
          row.x.push_back(x);
        }
      }
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    ++outcome_counts[static_cast<std::size_t>(row.y - 1)];
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("dataset file has a header but no rows");

  // Families grouped by region (stable in first appearance), persons in file order.
  std::vector<int> family_order(family_labels.size());
  std::iota(family_order.begin(), family_order.end(), 0);
  std::stable_sort(family_order.begin(), family_order.end(), [&](int a, int b) {
    return family_region[static_cast<std::size_t>(a)] < family_region[static_cast<std::size_t>(b)];
  });
  std::vector<int> family_rank(family_labels.size());
  for (std::size_t r = 0; r < family_order.size(); ++r) family_rank[static_cast<std::size_t>(family_order[r])] = static_cast<int>(r);
  std::vector<std::size_t> row_order(rows.size());
  std::iota(row_order.begin(), row_order.end(), 0);
  std::stable_sort(row_order.begin(), row_order.end(), [&](std::size_t a, std::size_t b) {
    return family_rank[static_cast<std::size_t>(rows[a].family)] < family_rank[static_cast<std::size_t>(rows[b].family)];
  });

  LoadResult out;
  Dataset& d = out.data;
  d.n_regions = static_cast<int>(region_labels.size());
  d.region_labels = region_labels;
  for (int f : family_order) {
    d.family_labels.push_back(family_labels[static_cast<std::size_t>(f)]);
    d.family_region.push_back(family_region[static_cast<std::size_t>(f)]);
  }
  const int p = plan.width();
  d.covariates.resize(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t k = 0; k < row_order.size(); ++k) {
    const Row& r = rows[row_order[k]];
    d.obs_family.push_back(family_rank[static_cast<std::size_t>(r.family)]);
    d.outcome.push_back(r.y);
    for (int c = 0; c < p; ++c) d.covariates(static_cast<Eigen::Index>(k), c) = r.x[static_cast<std::size_t>(c)];
  }
  d.covariate_names = plan.design_names();

  int col = 0;
  for (const auto& enc : plan.covariates) {
    if (enc.kind == CovariateEncoding::Kind::numeric && enc.center) {
      const double mean = d.covariates.col(col).mean();
      d.covariates.col(col).array() -= mean;
      report.centering.emplace_back(enc.column, mean);
    }
    col += enc.width();
  }
  d.validate(spec);

  report.n_regions = d.n_regions;
  report.n_families = d.n_families();
  report.n_obs = d.n_obs();
  for (int a = 0; a < spec.n_categories; ++a) {
    const std::string label = plan.outcome.labels.empty() ? std::to_string(a + 1) : plan.outcome.labels[static_cast<std::size_t>(a)];
    report.outcome_counts.emplace_back(label, outcome_counts[static_cast<std::size_t>(a)]);
  }
  for (std::size_t c = 0; c < plan.covariates.size(); ++c) {
    const auto& enc = plan.covariates[c];
    if (enc.kind != CovariateEncoding::Kind::categorical) continue;
    std::vector<std::pair<std::string, long>> counts;
    for (std::size_t l = 0; l < enc.levels.size(); ++l) counts.emplace_back(enc.levels[l], level_counts[c][l]);
    report.level_counts.emplace_back(enc.column, std::move(counts));
  }
  out.report = std::move(report);
  return out;
}

LoadResult load_dataset(const std::string& path, const EncodingPlan& plan, const ModelSpec& spec) {
  return parse_dataset(read_file(path), plan, spec);
}

std::string format_load_report(const LoadReport& r) {
  std::string out = "regions " + std::to_string(r.n_regions) + "\nfamilies " + std::to_string(r.n_families) +
                    "\nobservations " + std::to_string(r.n_obs) + "\n\noutcome\n";
  for (const auto& [label, n] : r.outcome_counts) out += "  " + label + " " + std::to_string(n) + "\n";
  for (const auto& [column, counts] : r.level_counts) {
    out += "\n" + column + "\n";
    for (const auto& [level, n] : counts) out += "  " + level + " " + std::to_string(n) + "\n";
  }
  for (const auto& [column, mean] : r.centering) {
    out += "\ncentered " + column + " by " + text::format_double(mean) + "\n";
  }
  return out;
}

std::string format_dataset(const Dataset& data) {
  const auto names = covariate_columns(data);
  std::string out = "region,family,y";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  auto label = [](const std::vector<std::string>& labels, int i, const char* prefix) {
    return static_cast<int>(labels.size()) > i ? labels[static_cast<std::size_t>(i)]
                                                 : prefix + std::to_string(i + 1);
  };
  for (int k = 0; k < data.n_obs(); ++k) {
    const int f = data.obs_family[static_cast<std::size_t>(k)];
    out += label(data.region_labels, data.family_region[static_cast<std::size_t>(f)], "R");
    out += ",";
    out += label(data.family_labels, f, "F");
    out += "," + std::to_string(data.outcome[static_cast<std::size_t>(k)]);
    for (double x : data.row(k)) out += "," + text::format_double(x);
    out += "\n";
  }
  return out;
}

EncodingPlan numeric_plan(const Dataset& data, int n_categories) {
  EncodingPlan plan;
  plan.outcome.column = "y";
  plan.outcome.n_categories = n_categories;
  for (const auto& n : covariate_columns(data)) {
    CovariateEncoding c;
    c.column = n;
    plan.covariates.push_back(c);
  }
  return plan;
}

}  // namespace bridgeord
