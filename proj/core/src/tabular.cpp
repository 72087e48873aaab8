#include "pilot/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "pilot/error.hpp"
#include "pilot/random.hpp"

namespace pilot {

std::string_view to_string(ColumnKind k) {
  return k == ColumnKind::numeric ? "numeric" : "categorical";
}

std::size_t target_size(const Target& t) {
  return std::visit([](const auto& v) { return v.size(); }, t);
}

void TabularDataset::validate() const {
  const std::size_t p = column_names.size();
  if (column_kinds.size() != p) throw ValidationError("column_kinds length differs from columns");
  if (target_size(target) != rows.size()) {
    throw ValidationError("target length " + std::to_string(target_size(target)) +
                          " differs from row count " + std::to_string(rows.size()));
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != p) {
      throw ValidationError("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                            " cells, expected " + std::to_string(p));
    }
    for (std::size_t c = 0; c < p; ++c) {
      const Cell& cell = rows[r][c];
      if (is_missing(cell)) continue;
      const bool numeric = std::holds_alternative<double>(cell);
      if (numeric != (column_kinds[c] == ColumnKind::numeric)) {
        throw ValidationError("row " + std::to_string(r) + " column '" + column_names[c] +
                              "' holds a cell of the wrong kind");
      }
    }
  }
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> indices) const {
  TabularDataset out{column_names, column_kinds, {}, {}};
  out.rows.reserve(indices.size());
  for (auto i : indices) out.rows.push_back(rows.at(i));
  out.target = std::visit(
      [&](const auto& v) -> Target {
        std::decay_t<decltype(v)> picked;
        picked.reserve(indices.size());
        for (auto i : indices) picked.push_back(v.at(i));
        return picked;
      },
      target);
  return out;
}

namespace {

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the row starts
};

std::vector<CsvRow> read_records(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t i = 0;
  std::size_t line = 1;
  if (text.starts_with("\xEF\xBB\xBF")) i = 3;
  while (i < text.size()) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool in_quotes = false;
    bool row_done = false;
    while (i < text.size() && !row_done) {
      const char ch = text[i];
      if (in_quotes) {
        if (ch == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          in_quotes = false;
        } else {
          if (ch == '\n') ++line;
          field += ch;
        }
        ++i;
        continue;
      }
      switch (ch) {
        case '"':
          if (!field.empty()) throw ParseError("quote inside unquoted field", line);
          in_quotes = true;
          break;
        case ',':
          row.fields.push_back(std::move(field));
          field.clear();
          break;
        case '\r':
          break;
        case '\n':
          ++line;
          row_done = true;
          break;
        default:
          field += ch;
      }
      ++i;
    }
    if (in_quotes) throw ParseError("unterminated quoted field", row.line);
    row.fields.push_back(std::move(field));
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

bool is_missing_text(std::string_view s) { return s.empty() || s == "NA"; }

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string quote_csv(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

TabularDataset parse_csv(std::string_view text, std::string_view target_column, TaskType task) {
  auto records = read_records(text);
  if (records.empty()) throw ParseError("missing header row");
  const auto& header = records.front().fields;
  auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end()) {
    throw ValidationError("target column '" + std::string(target_column) + "' not in header");
  }
  const std::size_t target_idx = static_cast<std::size_t>(target_it - header.begin());

  TabularDataset d;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != target_idx) d.column_names.push_back(header[c]);
  }
  const std::size_t p = d.column_names.size();

  Labels labels;
  Values values;
  std::vector<std::vector<std::string>> raw;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw ParseError("row has " + std::to_string(rec.fields.size()) + " fields, header has " +
                           std::to_string(header.size()),
                       rec.line);
    }
    const std::string& t = rec.fields[target_idx];
    if (is_missing_text(t)) throw ParseError("missing target value", rec.line);
    if (task == TaskType::regression) {
      auto v = parse_real(t);
      if (!v) throw ParseError("regression target '" + t + "' is not a real number", rec.line);
      values.push_back(*v);
    } else {
      labels.push_back(t);
    }
    std::vector<std::string> cells;
    cells.reserve(p);
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != target_idx) cells.push_back(rec.fields[c]);
    }
    raw.push_back(std::move(cells));
  }

  d.column_kinds.assign(p, ColumnKind::numeric);
  for (std::size_t c = 0; c < p; ++c) {
    for (const auto& cells : raw) {
      if (!is_missing_text(cells[c]) && !parse_real(cells[c])) {
        d.column_kinds[c] = ColumnKind::categorical;
        break;
      }
    }
  }

  d.rows.reserve(raw.size());
  for (const auto& cells : raw) {
    std::vector<Cell> row;
    row.reserve(p);
    for (std::size_t c = 0; c < p; ++c) {
      if (is_missing_text(cells[c])) {
        row.emplace_back(Missing{});
      } else if (d.column_kinds[c] == ColumnKind::numeric) {
        row.emplace_back(*parse_real(cells[c]));
      } else {
        row.emplace_back(cells[c]);
      }
    }
    d.rows.push_back(std::move(row));
  }
  if (task == TaskType::regression) {
    d.target = std::move(values);
  } else {
    d.target = std::move(labels);
  }
  return d;
}

TabularDataset load_csv(const std::filesystem::path& path, std::string_view target_column,
                        TaskType task) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), target_column, task);
}

std::string to_csv(const TabularDataset& d, std::string_view target_column) {
  std::string out;
  for (const auto& name : d.column_names) out += quote_csv(name) + ",";
  out += quote_csv(target_column) + "\n";
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    for (const auto& cell : d.rows[r]) {
      if (auto* v = std::get_if<double>(&cell)) {
        out += shortest(*v);
      } else if (auto* s = std::get_if<std::string>(&cell)) {
        out += quote_csv(*s);
      }
      out += ",";
    }
    if (auto* labels = std::get_if<Labels>(&d.target)) {
      out += quote_csv((*labels)[r]);
    } else {
      out += shortest(std::get<Values>(d.target)[r]);
    }
    out += "\n";
  }
  return out;
}

namespace {

/// Row indices grouped by label in sorted label order, or nullopt when the
/// dataset is not a classification dataset.
std::optional<std::vector<std::vector<std::size_t>>> class_groups(const TabularDataset& d,
                                                                  const TaskSpec& task) {
  const auto* labels = std::get_if<Labels>(&d.target);
  if (task.task_type != TaskType::classification || labels == nullptr) return std::nullopt;
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels->size(); ++i) by_label[(*labels)[i]].push_back(i);
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [label, rows] : by_label) groups.push_back(std::move(rows));
  return groups;
}

std::vector<std::size_t> iota_vec(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

SplitDataset split(const TabularDataset& d, const TaskSpec& task, std::int64_t seed) {
  task.validate();
  const std::size_t n = d.row_count();
  if (n < 2) throw ValidationError("cannot split a dataset with fewer than 2 rows");
  const auto rounded = static_cast<std::size_t>(std::llround(static_cast<double>(n) * task.test_fraction));
  const std::size_t n_test = std::clamp<std::size_t>(rounded, 1, n - 1);

  Rng rng(static_cast<std::uint64_t>(seed));
  std::vector<std::size_t> test_rows;
  auto groups = class_groups(d, task);
  const bool stratify =
      groups && std::all_of(groups->begin(), groups->end(),
                            [](const auto& g) { return g.size() >= 2; });
  if (stratify) {
    // Largest-remainder allocation of test rows across classes. The first
    // pass keeps a training row in every class; the second gives those up
    // only when the test size cannot be met otherwise.
    std::vector<std::size_t> take(groups->size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < groups->size(); ++g) {
      const double ideal = static_cast<double>((*groups)[g].size() * n_test) / static_cast<double>(n);
      take[g] = std::min(static_cast<std::size_t>(ideal), (*groups)[g].size() - 1);
      assigned += take[g];
      remainders.emplace_back(ideal - static_cast<double>(take[g]), g);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t pass = 0; assigned < n_test && pass < 2; ++pass) {
      for (const auto& [rem, g] : remainders) {
        if (assigned == n_test) break;
        if (take[g] + (pass == 0 ? 1 : 0) < (*groups)[g].size()) {
          ++take[g];
          ++assigned;
        }
      }
    }
    for (std::size_t g = 0; g < groups->size(); ++g) {
      auto& rows = (*groups)[g];
      rng.shuffle(std::span<std::size_t>(rows));
      test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take[g]));
    }
  } else {
    auto order = iota_vec(n);
    rng.shuffle(std::span<std::size_t>(order));
    test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  }
  std::sort(test_rows.begin(), test_rows.end());
  std::vector<std::size_t> train_rows;
  train_rows.reserve(n - test_rows.size());
  for (std::size_t i = 0, t = 0; i < n; ++i) {
    if (t < test_rows.size() && test_rows[t] == i) {
      ++t;
    } else {
      train_rows.push_back(i);
    }
  }
  return {d.subset(train_rows), d.subset(test_rows), seed, std::move(train_rows),
          std::move(test_rows)};
}

std::vector<std::vector<std::size_t>> kfold_indices(const TabularDataset& d, const TaskSpec& task,
                                                    std::size_t k, std::int64_t seed) {
  const std::size_t n = d.row_count();
  if (k < 2) throw ValidationError("k-fold needs k >= 2");
  if (n < k) {
    throw ValidationError("k-fold with k=" + std::to_string(k) + " needs at least " +
                          std::to_string(k) + " rows, dataset has " + std::to_string(n));
  }
  Rng rng(static_cast<std::uint64_t>(seed));
  auto groups = class_groups(d, task);
  if (!groups) groups = std::vector<std::vector<std::size_t>>{iota_vec(n)};
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (auto& rows : *groups) {
    rng.shuffle(std::span<std::size_t>(rows));
    for (auto r : rows) folds[next++ % k].push_back(r);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace pilot
