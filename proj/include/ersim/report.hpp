// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_REPORT_HPP
#define ERSIM_REPORT_HPP

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ersim/scatter.hpp"
#include "ersim/scenario.hpp"
#include "ersim/transforms.hpp"
#include "json.hpp"

namespace ersim::report
{

inline constexpr int kSchemaVersion = 1;

// File could not be written; the message carries the path.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Value as stored in reports: rounded to 12 significant digits.
double Round12(double v);
// Round12 as JSON; null for non-finite values.
nlohmann::ordered_json Number(double v);
std::string FormatNumber(double v);

nlohmann::ordered_json SampleJson(const scenario::Sample &s);
// Every report field; the config is echoed separately by the caller.
nlohmann::ordered_json ScenarioJson(const scenario::ScenarioReport &r);
nlohmann::ordered_json SweepJson(const scenario::SweepResult &r);
// Resonance table with the WKB action at each level and Gamma / (E_R exp(-A)).
nlohmann::ordered_json ResonanceJson(const BarrierSpec &spec,
                                     const std::vector<scatter::Resonance> &resonances);
nlohmann::ordered_json EquivalenceJson(const transforms::EquivalenceReport &r);

void WriteJson(const std::filesystem::path &path, const nlohmann::ordered_json &doc);

// CSV with a header row; every row must have the header's column count.
class CsvWriter
{
public:
  CsvWriter(const std::filesystem::path &path, std::vector<std::string> header);

  void Row(std::span<const double> values);
  void Row(std::initializer_list<double> values) { Row(std::span<const double>(values.begin(), values.size())); }
  void Close();

private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

void WriteTimeSeriesCsv(const std::filesystem::path &path,
                        const std::vector<scenario::Sample> &series);

}  // namespace ersim::report

#endif  // ERSIM_REPORT_HPP
