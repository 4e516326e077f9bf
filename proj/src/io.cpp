#include "eigenpool/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eigenpool/errors.hpp"

namespace eigenpool {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

std::string at_line(long line) { return "line " + std::to_string(line) + ": "; }

bool is_missing(const std::string& field) { return field.empty() || field == "NA" || field == "na" || field == "NaN"; }

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return in;
}

std::string idx(int i) { return std::to_string(i + 1); }

std::vector<std::string> sample_columns(const SampleFileHeader& h) {
  std::vector<std::string> c{"iteration", "w"};
  for (int i = 0; i < h.p; ++i) c.push_back("alpha_" + idx(i));
  for (int i = 0; i < h.p; ++i) c.push_back("beta_" + idx(i));
  for (int i = 0; i < h.p; ++i)
    for (int j = 0; j < h.p; ++j) c.push_back("V_" + idx(i) + "_" + idx(j));
  for (int k = 0; k < h.groups; ++k) {
    for (int j = 0; j < h.p; ++j) c.push_back("lambda_" + idx(k) + "_" + idx(j));
    for (int i = 0; i < h.p; ++i)
      for (int j = 0; j < h.p; ++j) c.push_back("U_" + idx(k) + "_" + idx(i) + "_" + idx(j));
  }
  if (h.copula) {
    for (int k = 0; k < h.groups; ++k)
      for (int i = 0; i < h.p; ++i)
        for (int j = i + 1; j < h.p; ++j) c.push_back("corr_" + idx(k) + "_" + idx(i) + "_" + idx(j));
  }
  return c;
}

}  // namespace

DataFormat parse_format(const std::string& name) {
  if (name == "raw") return DataFormat::raw;
  if (name == "ssq") return DataFormat::ssq;
  throw InvalidInput("unknown data format '" + name + "' (expected raw or ssq)");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidInput(what + ": '" + text + "' is not a number");
  }
  return value;
}

long parse_long(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidInput(what + ": '" + text + "' is not an integer");
  }
  return value;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const std::string& f : split_csv(text)) out.push_back(parse_double(f, what));
  if (out.empty()) throw InvalidInput(what + ": empty list");
  return out;
}

RawTable read_raw(std::istream& in, bool allow_missing) {
  RawTable table;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  std::vector<std::vector<std::vector<double>>> rows;
  std::vector<std::vector<std::vector<bool>>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "group") {
        throw InvalidInput(at_line(line_no) + "header must start with 'group' followed by variable names");
      }
      table.columns.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size() + 1) {
      throw InvalidInput(at_line(line_no) + "expected " + std::to_string(table.columns.size() + 1) + " fields, got " +
                         std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw InvalidInput(at_line(line_no) + "empty group label");
    std::size_t g = 0;
    while (g < table.groups.size() && table.groups[g] != fields[0]) ++g;
    if (g == table.groups.size()) {
      table.groups.push_back(fields[0]);
      rows.emplace_back();
      seen.emplace_back();
    }
    std::vector<double> row;
    std::vector<bool> mask;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      if (is_missing(fields[j])) {
        if (!allow_missing) throw InvalidInput(at_line(line_no) + "missing value not allowed here");
        row.push_back(0.0);
        mask.push_back(false);
        continue;
      }
      const double v = parse_double(fields[j], at_line(line_no) + "column " + table.columns[j - 1]);
      if (!std::isfinite(v)) throw InvalidInput(at_line(line_no) + "non-finite value");
      row.push_back(v);
      mask.push_back(true);
    }
    rows[g].push_back(std::move(row));
    seen[g].push_back(std::move(mask));
  }
  if (!have_header) throw InvalidInput("raw data file is empty");
  if (table.groups.empty()) throw InvalidInput("raw data file has no observations");
  const auto p = static_cast<Eigen::Index>(table.columns.size());
  for (std::size_t g = 0; g < rows.size(); ++g) {
    const auto n = static_cast<Eigen::Index>(rows[g].size());
    Matrix y(n, p);
    Mask m(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        y(i, j) = rows[g][i][j];
        m(i, j) = seen[g][i][j];
      }
    }
    table.values.push_back(std::move(y));
    table.observed.push_back(std::move(m));
  }
  return table;
}

void write_raw(std::ostream& out, const RawTable& table) {
  std::vector<std::string> header{"group"};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  out << join(header) << '\n';
  for (std::size_t g = 0; g < table.groups.size(); ++g) {
    const Matrix& y = table.values[g];
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      std::vector<std::string> f{table.groups[g]};
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const bool obs = table.observed.empty() || table.observed[g](i, j);
        f.push_back(obs ? format_double(y(i, j)) : "NA");
      }
      out << join(f) << '\n';
    }
  }
}

SsqData read_ssq(std::istream& in) {
  SsqData out;
  std::string line;
  long line_no = 0;
  int p = -1;
  auto next_line = [&](std::string& dest) {
    while (std::getline(in, dest)) {
      ++line_no;
      if (!skippable(dest)) return true;
    }
    return false;
  };
  while (next_line(line)) {
    const std::vector<std::string> head = split_csv(line);
    if (head.size() != 2 || head[0].empty()) throw InvalidInput(at_line(line_no) + "expected 'group,n'");
    for (const std::string& name : out.groups) {
      if (name == head[0]) throw InvalidInput(at_line(line_no) + "duplicate group block '" + head[0] + "'");
    }
    const long n = parse_long(head[1], at_line(line_no) + "sample size");
    if (n < 1) throw InvalidInput(at_line(line_no) + "sample size must be positive");
    std::vector<std::vector<double>> rows;
    const long block_line = line_no;
    do {
      std::string row_line;
      if (!next_line(row_line)) throw InvalidInput(at_line(block_line) + "block ends before all rows were read");
      const std::vector<std::string> f = split_csv(row_line);
      if (p < 0) p = static_cast<int>(f.size());
      if (static_cast<int>(f.size()) != p) {
        throw InvalidInput(at_line(line_no) + "expected " + std::to_string(p) + " values, got " +
                           std::to_string(f.size()));
      }
      std::vector<double> row;
      for (const std::string& x : f) row.push_back(parse_double(x, at_line(line_no) + "matrix entry"));
      rows.push_back(std::move(row));
    } while (static_cast<int>(rows.size()) < p);
    Matrix s(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) s(i, j) = rows[i][j];
    try {
      out.data.push_back(GroupData{static_cast<int>(n), SymMatrix(s, 1e-8)});
    } catch (const InvalidInput& e) {
      throw InvalidInput(at_line(block_line) + "group '" + head[0] + "': " + e.what());
    }
    out.groups.push_back(head[0]);
  }
  if (out.data.empty()) throw InvalidInput("sum-of-squares file has no groups");
  return out;
}

void write_ssq(std::ostream& out, const SsqData& data) {
  for (std::size_t g = 0; g < data.data.size(); ++g) {
    out << data.groups[g] << ',' << data.data[g].n << '\n';
    const Matrix& s = data.data[g].s.matrix();
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      std::vector<std::string> f;
      for (Eigen::Index j = 0; j < s.cols(); ++j) f.push_back(format_double(s(i, j)));
      out << join(f) << '\n';
    }
  }
}

SsqData raw_to_ssq(const RawTable& table, int min_n) {
  SsqData out;
  out.groups = table.groups;
  for (std::size_t g = 0; g < table.values.size(); ++g) {
    if (!table.observed.empty() && !table.observed[g].all()) {
      throw InvalidInput("group '" + table.groups[g] + "' has missing values; use the copula model");
    }
    const int n = static_cast<int>(table.values[g].rows());
    if (n < min_n) {
      throw InvalidInput("group '" + table.groups[g] + "' has " + std::to_string(n) + " observation(s); needs at least " +
                         std::to_string(min_n));
    }
    out.data.push_back(GroupData{n, centered_scatter(table.values[g])});
  }
  return out;
}

OrdinalTable raw_to_ordinal(const RawTable& table) {
  OrdinalTable t;
  t.values = table.values;
  t.observed = table.observed;
  t.validate();
  return t;
}

SsqData ingest_groups(const std::string& path, DataFormat format) {
  std::ifstream in = open_input(path);
  if (format == DataFormat::ssq) return read_ssq(in);
  return raw_to_ssq(read_raw(in, false), 2);
}

RawTable ingest_raw(const std::string& path, bool allow_missing) {
  std::ifstream in = open_input(path);
  return read_raw(in, allow_missing);
}

void write_sample_header(std::ostream& out, const SampleFileHeader& h) {
  out << "# schema=" << kSampleSchema << " p=" << h.p << " K=" << h.groups << " variant=" << variant_name(h.variant)
      << " copula=" << (h.copula ? 1 : 0) << '\n';
  out << join(sample_columns(h)) << '\n';
}

void write_sample_row(std::ostream& out, const SampleFileHeader& h, const PosteriorSample& s) {
  if (s.dim() != h.p || s.groups() != h.groups) throw InvalidInput("write_sample_row: sample does not match header");
  std::string row = std::to_string(s.iteration);
  auto put = [&](double x) {
    row += ',';
    row += format_double(x);
  };
  put(s.w);
  for (int i = 0; i < h.p; ++i) put(s.alpha(i));
  for (int i = 0; i < h.p; ++i) put(s.beta(i));
  for (int i = 0; i < h.p; ++i)
    for (int j = 0; j < h.p; ++j) put(s.v(i, j));
  for (int k = 0; k < h.groups; ++k) {
    for (int j = 0; j < h.p; ++j) put(s.lambda[k][j]);
    for (int i = 0; i < h.p; ++i)
      for (int j = 0; j < h.p; ++j) put(s.u[k](i, j));
  }
  if (h.copula) {
    if (static_cast<int>(s.correlation.size()) != h.groups) throw InvalidInput("write_sample_row: missing correlations");
    for (int k = 0; k < h.groups; ++k)
      for (int i = 0; i < h.p; ++i)
        for (int j = i + 1; j < h.p; ++j) put(s.correlation[k](i, j));
  }
  out << row << '\n';
}

SampleFile read_samples(std::istream& in) {
  SampleFile file;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# schema=", 0) != 0) {
    throw InvalidInput("line 1: sample file must start with a schema comment");
  }
  std::map<std::string, std::string> meta;
  {
    std::istringstream ss(line.substr(2));
    std::string tok;
    while (ss >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw InvalidInput("line 1: malformed schema token '" + tok + "'");
      meta[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  if (meta["schema"] != kSampleSchema) throw InvalidInput("line 1: unsupported schema '" + meta["schema"] + "'");
  for (const char* key : {"p", "K", "variant", "copula"}) {
    if (!meta.count(key)) throw InvalidInput(std::string("line 1: schema lacks ") + key);
  }
  SampleFileHeader& h = file.header;
  h.p = static_cast<int>(parse_long(meta["p"], "line 1: p"));
  h.groups = static_cast<int>(parse_long(meta["K"], "line 1: K"));
  h.variant = parse_variant(meta["variant"]);
  h.copula = parse_long(meta["copula"], "line 1: copula") != 0;
  if (h.p < 1 || h.groups < 1) throw InvalidInput("line 1: p and K must be positive");

  const std::vector<std::string> expected = sample_columns(h);
  if (!std::getline(in, line) || split_csv(trim(line)) != expected) {
    throw InvalidInput("line 2: column header does not match the schema");
  }
  long line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != expected.size()) {
      throw InvalidInput(at_line(line_no) + "expected " + std::to_string(expected.size()) + " fields, got " +
                         std::to_string(f.size()));
    }
    std::size_t c = 0;
    auto next = [&]() {
      const std::size_t i = c++;
      return parse_double(f[i], at_line(line_no) + expected[i]);
    };
    PosteriorSample s;
    s.variant = h.variant;
    s.iteration = parse_long(f[c++], at_line(line_no) + "iteration");
    s.w = next();
    s.alpha.resize(h.p);
    s.beta.resize(h.p);
    for (int i = 0; i < h.p; ++i) s.alpha(i) = next();
    for (int i = 0; i < h.p; ++i) s.beta(i) = next();
    Matrix v(h.p, h.p);
    for (int i = 0; i < h.p; ++i)
      for (int j = 0; j < h.p; ++j) v(i, j) = next();
    try {
      s.v = OrthonormalMatrix(v, 1e-7);
      for (int k = 0; k < h.groups; ++k) {
        Vector lam(h.p);
        for (int j = 0; j < h.p; ++j) lam(j) = next();
        Matrix u(h.p, h.p);
        for (int i = 0; i < h.p; ++i)
          for (int j = 0; j < h.p; ++j) u(i, j) = next();
        s.lambda.emplace_back(lam);
        s.u.emplace_back(u, 1e-7);
      }
    } catch (const InvalidInput& e) {
      throw InvalidInput(at_line(line_no) + e.what());
    }
    if (h.copula) {
      for (int k = 0; k < h.groups; ++k) {
        Matrix corr = Matrix::Identity(h.p, h.p);
        for (int i = 0; i < h.p; ++i)
          for (int j = i + 1; j < h.p; ++j) corr(i, j) = corr(j, i) = next();
        s.correlation.push_back(std::move(corr));
      }
    }
    file.samples.push_back(std::move(s));
  }
  return file;
}

SampleFile read_samples_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_samples(in);
}

std::map<std::string, std::string> read_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidInput(at_line(line_no) + "expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw InvalidInput(at_line(line_no) + "empty key");
    if (out.count(key)) throw InvalidInput(at_line(line_no) + "duplicate key '" + key + "'");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_config(in);
}

}  // namespace eigenpool
