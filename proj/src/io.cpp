#include "abcmc/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace abcmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double_strict(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && errno == 0;
}

std::uint64_t parse_u64(const std::string& s) {
  return std::strtoull(trim(s).c_str(), nullptr, 10);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  double back = 0.0;
  if (parse_double_strict(buf, back) && back == v) return buf;
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string serialize(const RunConfig& c) {
  std::ostringstream out;
  out << "model=" << c.model << "\n";
  for (const auto& [key, value] : c.hyper)
    out << "hyper." << key << "=" << format_double(value) << "\n";
  out << "kernel=" << c.kernel << "\n";
  out << "eps=" << format_double(c.eps) << "\n";
  out << "n_hits=" << c.n_hits << "\n";
  out << "trial_cap=" << c.trial_cap << "\n";
  out << "strict_cap=" << (c.strict_cap ? 1 : 0) << "\n";
  out << "iterations=" << c.iterations << "\n";
  out << "burn_in=" << c.burn_in << "\n";
  out << "thin=" << c.thin << "\n";
  out << "seed=" << c.seed << "\n";
  out << "step_sizes=" << join_double_list(c.step_sizes) << "\n";
  out << "noisy=" << (c.noisy ? 1 : 0) << "\n";
  out << "noisy_seed=" << c.noisy_seed << "\n";
  out << "data_path=" << c.data_path << "\n";
  out << "data_mode=" << c.data_mode << "\n";
  out << "synth_n=" << c.synth_n << "\n";
  out << "synth_theta=" << join_double_list(c.synth_theta) << "\n";
  out << "synth_x0=" << join_double_list(c.synth_x0) << "\n";
  out << "synth_seed=" << c.synth_seed << "\n";
  out << "init=" << join_double_list(c.init) << "\n";
  out << "init_retries=" << c.init_retries << "\n";
  out << "out_path=" << c.out_path << "\n";
  out << "save_perturbed_path=" << c.save_perturbed_path << "\n";
  return out.str();
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  c.hyper.clear();
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const auto as_double = [&] {
      double d = 0.0;
      if (!parse_double_strict(val, d))
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": bad number '" + val + "'");
      return d;
    };
    if (key.rfind("hyper.", 0) == 0) {
      c.hyper[key.substr(6)] = as_double();
    } else if (key == "model") {
      c.model = val;
    } else if (key == "kernel") {
      c.kernel = val;
    } else if (key == "eps") {
      c.eps = as_double();
    } else if (key == "n_hits") {
      c.n_hits = static_cast<int>(as_double());
    } else if (key == "trial_cap") {
      c.trial_cap = static_cast<long long>(as_double());
    } else if (key == "strict_cap") {
      c.strict_cap = val == "1" || val == "true";
    } else if (key == "iterations") {
      c.iterations = static_cast<std::size_t>(parse_u64(val));
    } else if (key == "burn_in") {
      c.burn_in = static_cast<std::size_t>(parse_u64(val));
    } else if (key == "thin") {
      c.thin = static_cast<std::size_t>(parse_u64(val));
    } else if (key == "seed") {
      c.seed = parse_u64(val);
    } else if (key == "step_sizes") {
      c.step_sizes = parse_double_list(val);
    } else if (key == "noisy") {
      c.noisy = val == "1" || val == "true";
    } else if (key == "noisy_seed") {
      c.noisy_seed = parse_u64(val);
    } else if (key == "data_path") {
      c.data_path = val;
    } else if (key == "data_mode") {
      c.data_mode = val;
    } else if (key == "synth_n") {
      c.synth_n = static_cast<std::size_t>(parse_u64(val));
    } else if (key == "synth_theta") {
      c.synth_theta = parse_double_list(val);
    } else if (key == "synth_x0") {
      c.synth_x0 = parse_double_list(val);
    } else if (key == "synth_seed") {
      c.synth_seed = parse_u64(val);
    } else if (key == "init") {
      c.init = parse_double_list(val);
    } else if (key == "init_retries") {
      c.init_retries = static_cast<std::size_t>(parse_u64(val));
    } else if (key == "out_path") {
      c.out_path = val;
    } else if (key == "save_perturbed_path") {
      c.save_perturbed_path = val;
    } else {
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

Dataset ingest_returns(const std::string& path, IngestMode mode) {
  std::ifstream in = open_or_throw(path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    double v = 0.0;
    if (!parse_double_strict(t, v)) {
      if (header_allowed) {  // a single leading header line is tolerated
        header_allowed = false;
        continue;
      }
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed value '" + t + "'");
    }
    if (!std::isfinite(v))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": non-finite value '" + t + "'");
    header_allowed = false;
    values.push_back(v);
  }

  Dataset data;
  if (mode == IngestMode::returns) {
    if (values.empty())
      throw std::runtime_error(path + ": no data values found");
    data.y = std::move(values);
    return data;
  }
  if (values.size() < 2)
    throw std::runtime_error(path + ": need at least 2 prices, found " +
                             std::to_string(values.size()));
  data.y.resize(values.size() - 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0))
      throw std::runtime_error(path + ": non-positive price " +
                               format_g12(values[i]));
    if (i > 0) data.y[i - 1] = std::log(values[i] / values[i - 1]);
  }
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  return ingest_returns(path, IngestMode::returns);
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::map<std::string, std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& [key, value] : header)
    out << "# " << key << "=" << value << "\n";
  out << "y\n";
  for (const double v : data.y) out << format_g12(v) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_trace_csv(const std::string& path, const ChainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& [key, value] : trace.config_echo)
    out << "# " << key << "=" << value << "\n";
  out << "# kernel=" << to_string(trace.kind) << "\n";
  out << "# data_n=" << trace.data_n << "\n";
  out << "# burn_in=" << trace.burn_in << "\n";
  out << "# thin=" << trace.thin << "\n";
  out << "# seed=" << trace.seed << "\n";
  out << "# n_hits=" << trace.n_trials << "\n";
  out << "# eps=" << format_double(trace.eps) << "\n";
  out << "# trial_cap=" << trace.trial_cap << "\n";
  out << "# accept_count=" << trace.accept_count << "\n";
  out << "# cap_hit_count=" << trace.cap_hit_count << "\n";
  out << "# numeric_reject_count=" << trace.numeric_reject_count << "\n";
  out << "iter,accepted,log_est,draws,cap_hit";
  for (const std::string& name : trace.coord_names) out << "," << name;
  out << "\n";
  for (const ChainRow& row : trace.rows) {
    out << row.iter << "," << (row.accepted ? 1 : 0) << ","
        << format_g12(row.log_estimate) << "," << row.draws << ","
        << (row.cap_hit ? 1 : 0);
    for (const double c : row.coords) out << "," << format_g12(c);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ChainTrace read_trace_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  ChainTrace trace;
  std::string line;
  bool saw_columns = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string t = trim(line.substr(1));
      const auto eq = t.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(t.substr(0, eq));
      const std::string val = trim(t.substr(eq + 1));
      if (key.rfind("config.", 0) == 0) trace.config_echo[key] = val;
      if (key == "kernel") trace.kind = kernel_kind_from_string(val);
      else if (key == "data_n") trace.data_n = parse_u64(val);
      else if (key == "burn_in") trace.burn_in = parse_u64(val);
      else if (key == "thin") trace.thin = parse_u64(val);
      else if (key == "seed") trace.seed = parse_u64(val);
      else if (key == "n_hits") trace.n_trials = static_cast<int>(parse_u64(val));
      else if (key == "trial_cap") trace.trial_cap = static_cast<long long>(parse_u64(val));
      else if (key == "eps") { double e = 0; parse_double_strict(val, e); trace.eps = e; }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!saw_columns) {
      if (fields.size() < 5 || fields[0] != "iter")
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected trace column header");
      trace.coord_names.assign(fields.begin() + 5, fields.end());
      saw_columns = true;
      continue;
    }
    if (fields.size() != 5 + trace.coord_names.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": wrong field count");
    ChainRow row;
    row.iter = parse_u64(fields[0]);
    row.accepted = fields[1] == "1";
    if (!parse_double_strict(fields[2], row.log_estimate))
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": bad log_est");
    row.draws = static_cast<long long>(parse_u64(fields[3]));
    row.cap_hit = fields[4] == "1";
    row.coords.resize(trace.coord_names.size());
    for (std::size_t c = 0; c < row.coords.size(); ++c) {
      if (!parse_double_strict(fields[5 + c], row.coords[c]))
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": bad coordinate value");
    }
    trace.accept_count += row.accepted;
    trace.cap_hit_count += row.cap_hit;
    trace.rows.push_back(std::move(row));
  }
  if (!saw_columns)
    throw std::runtime_error(path + ": no trace rows found");
  trace.iterations = trace.rows.size();
  return trace;
}

std::vector<double> parse_grid_spec(const std::string& spec) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  const auto c1 = spec.find(':');
  const auto c2 = spec.rfind(':');
  if (c1 == std::string::npos || c2 == c1)
    throw std::runtime_error("grid spec must be lo:hi:step, got '" + spec + "'");
  if (!parse_double_strict(spec.substr(0, c1), lo) ||
      !parse_double_strict(spec.substr(c1 + 1, c2 - c1 - 1), hi) ||
      !parse_double_strict(spec.substr(c2 + 1), step))
    throw std::runtime_error("bad grid spec '" + spec + "'");
  if (!(step > 0.0) || hi < lo)
    throw std::runtime_error("grid spec needs hi >= lo and step > 0");
  std::vector<double> grid;
  const std::size_t count =
      static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    grid.push_back(lo + step * static_cast<double>(i));
  return grid;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  const std::string t = trim(csv);
  if (t.empty()) return out;
  std::stringstream ss(t);
  std::string field;
  while (std::getline(ss, field, ',')) {
    double v = 0.0;
    if (!parse_double_strict(field, v))
      throw std::runtime_error("bad numeric list element '" + field + "'");
    out.push_back(v);
  }
  return out;
}

std::string join_double_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace abcmc
