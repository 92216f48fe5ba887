#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rsbl/experiments.hpp"

namespace rsbl::experiments {

namespace {

constexpr std::array<std::string_view, 6> kCommands{
    "table1", "cluster-robustness", "bound-verify", "probe", "sandwich", "lowrank"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void config_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Config, "line " + std::to_string(line) + ": " + what);
}

std::uint64_t parse_u64(std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::Config, "not an unsigned integer: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

std::vector<double> powers_of_half(int count) {
  std::vector<double> out;
  for (int i = 1; i <= count; ++i) out.push_back(std::ldexp(1.0, -i));
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(Mode mode) noexcept { return mode == Mode::Quick ? "quick" : "full"; }

std::vector<std::string_view> command_names() { return {kCommands.begin(), kCommands.end()}; }

ExperimentConfig ExperimentConfig::defaults(std::string_view command) {
  ExperimentConfig c;
  c.experiment = std::string(command);
  if (command == "table1") return c;
  if (command == "cluster-robustness") {
    c.n = 1000;
    c.bd = 60;
    c.b = {};
    c.d = {2, 3, 4, 5};
    c.d_alpha = {2, 3, 4};
    c.beta = powers_of_half(12);
    c.alpha = powers_of_half(10);
    c.placement = "both";
    c.sweep = "both";
    return c;
  }
  if (command == "bound-verify") {
    c.n = 60;
    c.b = {1, 2, 3};
    c.d = {2, 3};
    c.beta = {0.5};
    c.alpha = {1.0};
    c.placement = "both";
    return c;
  }
  if (command == "probe") {
    c.n = 2;
    c.b = {2};
    c.d = {2};
    c.beta = {};
    c.alpha = {};
    c.lambda_i = {1.0, 2.0};
    c.lambda_j = {3.0, 4.0};
    return c;
  }
  if (command == "sandwich") {
    c.n = 4;
    c.b = {1, 2, 3, 4};
    c.d = {2};
    c.beta = {};
    c.alpha = {};
    return c;
  }
  if (command == "lowrank") {
    c.n = 16;
    c.rows = 16;
    c.b = {2};
    c.d = {2};
    c.steps = 6;
    c.epsilon = 0.1;
    c.beta = {};
    c.alpha = {};
    c.singular_values = {10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    return c;
  }
  throw Error(ErrorKind::Config, "unknown command '" + std::string(command) + "'");
}

std::size_t default_trials(std::string_view command, Mode mode) {
  const bool quick = mode == Mode::Quick;
  if (command == "table1") return 5;
  if (command == "cluster-robustness") return quick ? 200 : 1000;
  if (command == "bound-verify") return quick ? 20 : 100;
  if (command == "probe") return quick ? 10000 : 100000;
  if (command == "sandwich") return quick ? 1000 : 10000;
  if (command == "lowrank") return quick ? 10 : 100;
  throw Error(ErrorKind::Config, "unknown command '" + std::string(command) + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::Config, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment = " << c.experiment << '\n'
     << "mode = " << to_string(c.mode) << '\n'
     << "n = " << c.n << '\n'
     << "rows = " << c.rows << '\n'
     << "b = " << join_sizes(c.b) << '\n'
     << "d = " << join_sizes(c.d) << '\n'
     << "d_alpha = " << join_sizes(c.d_alpha) << '\n'
     << "bd = " << c.bd << '\n'
     << "beta = " << join_doubles(c.beta) << '\n'
     << "alpha = " << join_doubles(c.alpha) << '\n'
     << "alpha_fixed = " << format_double(c.alpha_fixed) << '\n'
     << "beta_fixed = " << format_double(c.beta_fixed) << '\n'
     << "trials = " << c.trials << '\n'
     << "seed = " << c.seed << '\n'
     << "grid = " << c.grid << '\n'
     << "placement = " << c.placement << '\n'
     << "sweep = " << c.sweep << '\n'
     << "preset = " << c.preset << '\n'
     << "steps = " << c.steps << '\n'
     << "epsilon = " << format_double(c.epsilon) << '\n'
     << "tol = " << format_double(c.tol) << '\n'
     << "targets = " << c.targets << '\n'
     << "singular_values = " << join_doubles(c.singular_values) << '\n'
     << "lambda_i = " << join_doubles(c.lambda_i) << '\n'
     << "lambda_j = " << join_doubles(c.lambda_j) << '\n'
     << "out = " << c.out << '\n';
  return os.str();
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig c) {
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(std::string(key)).second) {
      config_error(line_no, "duplicate key '" + std::string(key) + "'");
    }
    auto sizes = [&] {
      std::vector<std::size_t> v;
      for (auto item : split_list(value)) v.push_back(static_cast<std::size_t>(parse_u64(item)));
      return v;
    };
    auto doubles = [&] {
      std::vector<double> v;
      for (auto item : split_list(value)) v.push_back(parse_double(item));
      return v;
    };
    try {
      if (key == "experiment") c.experiment = std::string(value);
      else if (key == "mode") {
        if (value == "quick") c.mode = Mode::Quick;
        else if (value == "full") c.mode = Mode::Full;
        else config_error(line_no, "mode must be quick or full");
      }
      else if (key == "n") c.n = parse_u64(value);
      else if (key == "rows") c.rows = parse_u64(value);
      else if (key == "b") c.b = sizes();
      else if (key == "d") c.d = sizes();
      else if (key == "d_alpha") c.d_alpha = sizes();
      else if (key == "bd") c.bd = parse_u64(value);
      else if (key == "beta") c.beta = doubles();
      else if (key == "alpha") c.alpha = doubles();
      else if (key == "alpha_fixed") c.alpha_fixed = parse_double(value);
      else if (key == "beta_fixed") c.beta_fixed = parse_double(value);
      else if (key == "trials") {
        c.trials = parse_u64(value);
        if (c.trials == 0) config_error(line_no, "trials must be >= 1");
      }
      else if (key == "seed") c.seed = parse_u64(value);
      else if (key == "grid") c.grid = parse_u64(value);
      else if (key == "placement") c.placement = std::string(value);
      else if (key == "sweep") c.sweep = std::string(value);
      else if (key == "preset") c.preset = std::string(value);
      else if (key == "steps") c.steps = parse_u64(value);
      else if (key == "epsilon") c.epsilon = parse_double(value);
      else if (key == "tol") c.tol = parse_double(value);
      else if (key == "targets") c.targets = parse_u64(value);
      else if (key == "singular_values") c.singular_values = doubles();
      else if (key == "lambda_i") c.lambda_i = doubles();
      else if (key == "lambda_j") c.lambda_j = doubles();
      else if (key == "out") c.out = std::string(value);
      else config_error(line_no, "unknown key '" + std::string(key) + "'");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Config || std::string_view(e.what()).find("line ") != std::string_view::npos) {
        throw;
      }
      config_error(line_no, e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void resolve(ExperimentConfig& c) {
  const auto names = command_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    throw Error(ErrorKind::Config, "unknown experiment '" + c.experiment + "'");
  }
  if (c.trials == 0) c.trials = default_trials(c.experiment, c.mode);
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::Config, what);
  };
  auto positive = [](const std::vector<std::size_t>& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](std::size_t x) { return x > 0; });
  };
  auto positive_reals = [](const std::vector<double>& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
  };
  require(c.n >= 1, "n must be >= 1");
  require(c.grid >= 2, "grid must be >= 2");
  require(c.placement == "exterior" || c.placement == "interior" || c.placement == "both",
          "placement must be exterior, interior or both");
  require(c.sweep == "beta" || c.sweep == "alpha" || c.sweep == "both",
          "sweep must be beta, alpha or both");
  require(c.preset == "standard" || c.preset == "free", "preset must be standard or free");

  const std::string& e = c.experiment;
  if (e == "table1") {
    require(positive(c.b), "b list must be nonempty and positive");
    require(positive_reals(c.beta), "beta list must be nonempty and positive");
    require(c.targets >= 1 && c.targets < c.n, "need 1 <= targets < n");
    require(c.tol > 0.0, "tol must be positive");
  } else if (e == "cluster-robustness") {
    if (c.preset == "standard") require(c.n == 1000 && c.bd == 60, "standard preset needs n = 1000 and bd = 60");
    require(c.bd >= 1 && c.bd < c.n, "need 1 <= bd < n");
    if (c.sweep != "alpha") {
      require(positive(c.d), "d list must be nonempty and positive");
      require(positive_reals(c.beta), "beta list must be nonempty and positive");
      require(c.alpha_fixed > 0.0, "alpha_fixed must be positive");
    }
    if (c.sweep != "beta") {
      require(positive(c.d_alpha), "d_alpha list must be nonempty and positive");
      require(positive_reals(c.alpha), "alpha list must be nonempty and positive");
      require(c.beta_fixed > 0.0, "beta_fixed must be positive");
    }
    for (auto d : c.d) require(c.bd % d == 0, "every d must divide bd");
    for (auto d : c.d_alpha) require(c.bd % d == 0, "every d_alpha must divide bd");
  } else if (e == "bound-verify") {
    require(positive(c.b) && positive(c.d), "b and d lists must be nonempty and positive");
    require(positive_reals(c.alpha) && positive_reals(c.beta), "alpha and beta must be positive");
  } else if (e == "probe") {
    require(!c.lambda_i.empty() && c.lambda_i.size() == c.lambda_j.size(),
            "lambda_i and lambda_j must be nonempty and of equal length");
  } else if (e == "sandwich") {
    require(positive(c.b), "b list must be nonempty and positive");
  } else if (e == "lowrank") {
    require(positive(c.b) && positive(c.d), "b and d lists must be nonempty and positive");
    require(!c.singular_values.empty() && c.singular_values.size() <= c.n,
            "need 1 <= len(singular_values) <= n");
    require(c.rows == 0 || c.rows >= c.n, "rows must be >= n");
    require(c.steps >= 1, "steps must be >= 1");
    require(c.epsilon >= 0.0, "epsilon must be >= 0");
  }
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::string text = serialize(config);
  const auto at = text.find("\nout = ");
  if (at != std::string::npos) text.erase(at + 1);
  return fnv1a(text);
}

std::uint64_t stream_id(std::uint64_t hash, std::string_view cell, std::size_t trial) {
  return splitmix64(fnv1a(cell) ^ splitmix64(hash + static_cast<std::uint64_t>(trial)));
}

std::vector<std::uint64_t> stream_ids(std::uint64_t hash, std::string_view cell,
                                      std::size_t trials) {
  std::vector<std::uint64_t> out(trials);
  for (std::size_t t = 0; t < trials; ++t) out[t] = stream_id(hash, cell, t);
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void write_rows(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::unordered_map<std::string, std::size_t> first_seen;
  std::vector<std::size_t> rank(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rank[i] = first_seen.try_emplace(rows[i].config, first_seen.size()).first->second;
  }
  std::vector<std::size_t> idx(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (rank[a] != rank[b]) return rank[a] < rank[b];
    return rows[a].trial < rows[b].trial;
  });

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
  out << "experiment,config,trial,seed,stream,metric,value,status,retries\n";
  for (std::size_t i : idx) {
    const auto& r = rows[i];
    out << csv_field(r.experiment) << ',' << csv_field(r.config) << ',' << r.trial << ','
        << r.seed << ',' << r.stream << ',' << csv_field(r.metric) << ','
        << format_double(r.value) << ',' << csv_field(r.status) << ',' << r.retries << '\n';
  }
}

}  // namespace rsbl::experiments
