#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "eigenpool/copula.hpp"
#include "eigenpool/hiermodel.hpp"

namespace eigenpool {

enum class DataFormat { raw, ssq };
DataFormat parse_format(const std::string& name);

// 17 significant digits; round-trips every double.
std::string format_double(double x);

/// Raw observations: CSV with a header, first column `group`, remaining p
/// columns numeric. Groups keep their order of first appearance. Missing
/// values (`NA` or empty) are accepted only when `allow_missing`.
struct RawTable {
  std::vector<std::string> columns;  // the p variable names
  std::vector<std::string> groups;
  std::vector<Matrix> values;
  std::vector<Mask> observed;
};

RawTable read_raw(std::istream& in, bool allow_missing);
void write_raw(std::ostream& out, const RawTable& table);

/// Sum-of-squares blocks: a `name,n` line followed by p rows of p values.
/// Blank lines and `#` comments are skipped.
struct SsqData {
  std::vector<std::string> groups;
  std::vector<GroupData> data;
};

SsqData read_ssq(std::istream& in);
void write_ssq(std::ostream& out, const SsqData& data);

// Centered sums of squares per group. Throws on missing values and on
// groups with fewer than min_n rows.
SsqData raw_to_ssq(const RawTable& table, int min_n = 2);
OrdinalTable raw_to_ordinal(const RawTable& table);

SsqData ingest_groups(const std::string& path, DataFormat format);
RawTable ingest_raw(const std::string& path, bool allow_missing);

/// Sample file: first line `# schema=eigenpool.samples/1 p=.. K=.. variant=..
/// copula=0|1`, then a header and one row per saved sample. Columns:
/// iteration, w, alpha_i, beta_i, V_i_j (row-major), then per group k
/// lambda_k_j and U_k_i_j, then in copula mode corr_k_i_j for i < j. Indices
/// are 1-based.
struct SampleFileHeader {
  int p = 0;
  int groups = 0;
  ModelVariant variant = ModelVariant::hierarchical;
  bool copula = false;
};

inline constexpr const char* kSampleSchema = "eigenpool.samples/1";

void write_sample_header(std::ostream& out, const SampleFileHeader& header);
void write_sample_row(std::ostream& out, const SampleFileHeader& header, const PosteriorSample& sample);

struct SampleFile {
  SampleFileHeader header;
  std::vector<PosteriorSample> samples;
};

SampleFile read_samples(std::istream& in);
SampleFile read_samples_file(const std::string& path);

/// key=value lines; `#` starts a comment. Duplicate keys are an error.
std::map<std::string, std::string> read_config(std::istream& in);
std::map<std::string, std::string> read_config_file(const std::string& path);

// Helpers shared by the config and CLI layers.
double parse_double(const std::string& text, const std::string& what);
long parse_long(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);

}  // namespace eigenpool
