#include "dataset/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "common/csv.hpp"
#include "common/errors.hpp"
#include "common/numeric.hpp"

namespace dcmsg::dataset {
namespace {

std::vector<AttributeDef> build_dictionary() {
  using K = VariableKind;
  return {
      {"ID", "This is the ID number of the respondent", K::Id, {}, {}, "integer"},
      {"TaskID", "This is the ID number of the choice task", K::Id, {}, {}, "integer"},
      {"Stores", "Distance to grocery store in walking time", K::Attribute,
       {"2", "5", "10", "15"}, {2, 5, 10, 15}, "minutes"},
      {"Transport", "Distance to public transport stop in walking time", K::Attribute,
       {"2", "5", "10", "15"}, {2, 5, 10, 15}, "minutes"},
      {"City", "Distance to city centre in kms", K::Attribute,
       {"<1", "1 to 2", "3 to 4", ">4"}, {1, 2, 3, 4}, "km (ordinal)"},
      {"Noise", "Street traffic noise", K::Attribute,
       {"None", "Little", "Medium", "High"}, {1, 2, 3, 4}, "ordinal"},
      {"Green", "Green areas in residential area", K::Attribute,
       {"None", "Few", "Some", "Many"}, {1, 2, 3, 4}, "ordinal"},
      {"Cost", "Monthly change in housing cost vs current", K::Attribute,
       {"-150", "-50", "50", "150"}, {-150, -50, 50, 150}, "euros/month"},
      {"Choice", "Indicates the choice", K::Choice, {"A", "B", "C"}, {1, 2, 3}, "1 = A, 2 = B, 3 = C"},
      {"Age", "Age in years", K::Covariate, {"<30", "30 to 50", ">=50"}, {1, 2, 3}, "band"},
      {"Woman", "Indicates if respondent is a woman (1) or not (0)", K::Covariate,
       {"No", "Yes"}, {0, 1}, "binary"},
      {"Homeowner", "Indicates if respondent is a homeowner (1) or not (0)", K::Covariate,
       {"No", "Yes"}, {0, 1}, "binary"},
      {"Carowner", "Indicates if respondent is a car owner (1) or not (0)", K::Covariate,
       {"No", "Yes"}, {0, 1}, "binary"},
      {"Respcity", "Indicates corresponding city", K::Covariate,
       {"City 1", "City 2", "City 3", "City 4"}, {1, 2, 3, 4}, "categorical"},
      {"Job", "Indicates if respondent is working (1) or not (0)", K::Covariate,
       {"No", "Yes"}, {0, 1}, "binary"},
  };
}

constexpr std::size_t kFirstAttributeDef = 2;
constexpr std::size_t kFirstCovariateDef = 9;

constexpr std::array<std::string_view, kNumAttributes> kAttributeKeys = {
    "stores", "transport", "city", "noise", "green", "cost"};

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  fail(ErrorCode::MalformedFile, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

const std::vector<AttributeDef>& default_dictionary() {
  static const std::vector<AttributeDef> dict = build_dictionary();
  return dict;
}

const AttributeDef& attribute_def(Attribute a) {
  return default_dictionary()[kFirstAttributeDef + static_cast<std::size_t>(a)];
}

const AttributeDef& covariate_def(Covariate c) {
  return default_dictionary()[kFirstCovariateDef + static_cast<std::size_t>(c)];
}

std::string_view attribute_name(Attribute a) { return attribute_def(a).name; }

std::string_view attribute_key(Attribute a) {
  return kAttributeKeys[static_cast<std::size_t>(a)];
}

std::string_view covariate_name(Covariate c) { return covariate_def(c).name; }

std::string_view alternative_label(std::size_t alt) {
  static constexpr std::array<std::string_view, kNumAlternatives> labels = {"A", "B", "C"};
  return labels.at(alt);
}

std::string attribute_column(Attribute a, std::size_t alt) {
  return std::string(attribute_key(a)) + "_" + std::string(alternative_label(alt));
}

const std::vector<std::string>& file_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"ID", "TaskID"};
    for (std::size_t alt = 0; alt < kNumAlternatives; ++alt)
      for (std::size_t k = 0; k < kNumAttributes; ++k)
        c.push_back(attribute_column(static_cast<Attribute>(k), alt));
    c.emplace_back("Choice");
    for (std::size_t j = 0; j < kNumCovariates; ++j)
      c.emplace_back(covariate_name(static_cast<Covariate>(j)));
    return c;
  }();
  return cols;
}

void refresh_counts(ChoiceDataset& ds) {
  std::map<int, std::size_t> per_individual;
  for (const auto& row : ds.rows) ++per_individual[row.respondent_id];
  ds.n_individuals = per_individual.size();
  ds.n_tasks_per_individual = 0;
  for (const auto& [id, n] : per_individual)
    ds.n_tasks_per_individual = std::max(ds.n_tasks_per_individual, n);
}

ChoiceDataset make_dataset(std::vector<ChoiceRow> rows) {
  ChoiceDataset ds;
  ds.rows = std::move(rows);
  ds.dictionary = default_dictionary();
  refresh_counts(ds);
  return ds;
}

bool is_complete(const ChoiceDataset& ds) {
  return std::all_of(ds.rows.begin(), ds.rows.end(), [](const ChoiceRow& r) {
    return std::all_of(r.covariates.begin(), r.covariates.end(),
                       [](const auto& v) { return v.has_value(); });
  });
}

std::uint64_t fingerprint(const ChoiceDataset& ds) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& row : ds.rows) {
    mix(&row.respondent_id, sizeof row.respondent_id);
    mix(&row.task_id, sizeof row.task_id);
    for (const auto& alt : row.attr) mix(alt.data(), sizeof(double) * alt.size());
    mix(&row.choice, sizeof row.choice);
    for (const auto& c : row.covariates) {
      const double v = c.value_or(-1e300);
      const unsigned char present = c.has_value();
      mix(&present, 1);
      mix(&v, sizeof v);
    }
  }
  return h;
}

// ---- io ----

ChoiceDataset parse_dataset(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  if (table.empty()) fail(ErrorCode::MalformedFile, "missing header row");
  if (table.front() != file_columns()) {
    fail(ErrorCode::MalformedFile, "header does not match the data dictionary columns");
  }

  std::vector<ChoiceRow> rows;
  std::set<std::pair<int, int>> seen;
  for (std::size_t line = 1; line < table.size(); ++line) {
    const auto& f = table[line];
    if (f.size() == 1 && f[0].empty()) continue;  // blank line
    if (f.size() != file_columns().size()) malformed(line + 1, "wrong field count");

    ChoiceRow row;
    long long id = 0, task = 0, choice = 0;
    if (!parse_int(f[0], id)) malformed(line + 1, "non-integer ID");
    if (!parse_int(f[1], task)) malformed(line + 1, "non-integer TaskID");
    row.respondent_id = static_cast<int>(id);
    row.task_id = static_cast<int>(task);
    if (!seen.emplace(row.respondent_id, row.task_id).second)
      malformed(line + 1, "duplicate (ID, TaskID)");

    std::size_t col = 2;
    for (std::size_t alt = 0; alt < kNumAlternatives; ++alt) {
      for (std::size_t k = 0; k < kNumAttributes; ++k, ++col) {
        double v = 0;
        if (!parse_double(f[col], v)) malformed(line + 1, "bad value in " + file_columns()[col]);
        const auto& codes = attribute_def(static_cast<Attribute>(k)).numeric_codes;
        if (std::find(codes.begin(), codes.end(), v) == codes.end())
          malformed(line + 1, "value outside level set in " + file_columns()[col]);
        row.attr[alt][k] = v;
      }
    }
    if (!parse_int(f[col], choice) || choice < 1 || choice > 3)
      malformed(line + 1, "choice must be 1, 2 or 3");
    row.choice = static_cast<int>(choice);
    ++col;
    for (std::size_t j = 0; j < kNumCovariates; ++j, ++col) {
      if (f[col].empty()) continue;  // ABSENT
      double v = 0;
      if (!parse_double(f[col], v)) malformed(line + 1, "bad value in " + file_columns()[col]);
      row.covariates[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::EmptyDataset, "dataset has no data rows");
  return make_dataset(std::move(rows));
}

ChoiceDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str());
}

std::string to_csv(const ChoiceDataset& ds) {
  std::string out = csv::join_row(file_columns());
  out.push_back('\n');
  std::vector<std::string> fields;
  for (const auto& row : ds.rows) {
    fields.clear();
    fields.push_back(std::to_string(row.respondent_id));
    fields.push_back(std::to_string(row.task_id));
    for (const auto& alt : row.attr)
      for (double v : alt) fields.push_back(format_double(v));
    fields.push_back(std::to_string(row.choice));
    for (const auto& c : row.covariates) fields.push_back(c ? format_double(*c) : std::string());
    out += csv::join_row(fields);
    out.push_back('\n');
  }
  return out;
}

void save_dataset(const ChoiceDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << to_csv(ds);
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace dcmsg::dataset
