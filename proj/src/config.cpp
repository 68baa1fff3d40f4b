#include "offload/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace offload {
namespace {

struct Value {
  enum Kind { Number, Array, Word } kind = Number;
  double num = 0;
  std::vector<double> arr;
  std::string word;
  int line = 0;
  mutable bool used = false;
};

using KeyMap = std::map<std::string, Value>;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config error at line " << line << ": " << msg;
  throw ConfigError(os.str());
}

double parse_number(const std::string& s, int line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || trim(end) != "") fail(line, "expected a number, got '" + s + "'");
  return v;
}

Value parse_value(const std::string& raw, int line) {
  Value v;
  v.line = line;
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') fail(line, "unterminated array");
    v.kind = Value::Array;
    std::string body = raw.substr(1, raw.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(line, "empty array element");
      v.arr.push_back(parse_number(item, line));
    }
    if (v.arr.empty()) fail(line, "empty array");
    return v;
  }
  char* end = nullptr;
  double num = std::strtod(raw.c_str(), &end);
  if (end != raw.c_str() && trim(end).empty()) {
    v.kind = Value::Number;
    v.num = num;
    return v;
  }
  v.kind = Value::Word;
  v.word = raw;
  return v;
}

KeyMap tokenize(const std::string& text) {
  KeyMap map;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "missing key");
    if (val.empty()) fail(lineno, "missing value for '" + key + "'");
    if (map.count(key)) fail(lineno, "duplicate key '" + key + "'");
    map.emplace(key, parse_value(val, lineno));
  }
  return map;
}

const Value* find(const KeyMap& map, const std::string& key) {
  auto it = map.find(key);
  if (it == map.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

double get_num(const KeyMap& map, const std::string& key, double fallback) {
  const Value* v = find(map, key);
  if (!v) return fallback;
  if (v->kind != Value::Number) fail(v->line, "'" + key + "' must be a number");
  return v->num;
}

bool get_bool(const KeyMap& map, const std::string& key, bool fallback) {
  const Value* v = find(map, key);
  if (!v) return fallback;
  if (v->kind == Value::Word && v->word == "true") return true;
  if (v->kind == Value::Word && v->word == "false") return false;
  fail(v->line, "'" + key + "' must be true or false");
}

std::vector<double> get_array(const KeyMap& map, const std::string& key) {
  const Value* v = find(map, key);
  if (!v) fail(0, "missing required key '" + key + "'");
  if (v->kind != Value::Array) fail(v->line, "'" + key + "' must be an array");
  return v->arr;
}

std::string user_key(int i, const std::string& field) {
  return "user." + std::to_string(i) + "." + field;
}

DeviceProfile read_device(const KeyMap& map, const std::string& prefix,
                          const DeviceProfile& fallback) {
  DeviceProfile d = fallback;
  d.local_time_per_bit = get_num(map, prefix + "local_time_per_bit_s", d.local_time_per_bit);
  d.local_energy_per_bit =
      get_num(map, prefix + "local_energy_per_bit_j", d.local_energy_per_bit);
  d.tx_energy_per_bit = get_num(map, prefix + "tx_energy_per_bit_j", d.tx_energy_per_bit);
  d.rx_energy_per_bit = get_num(map, prefix + "rx_energy_per_bit_j", d.rx_energy_per_bit);
  return d;
}

}  // namespace

Instance InstanceConfig::instantiate(std::uint64_t seed_override) const {
  if (fixed) {
    Instance inst;
    inst.users = users;
    inst.params = params;
    inst.mode = mode;
    inst.validate();
    return inst;
  }
  Instance inst = generate_instance(params, device, n_users, m_tasks,
                                    seed_override, mode);
  for (UserProfile& u : inst.users) {
    u.eta_u = eta_u;
    u.eta_d = eta_d;
    u.rho = rho;
  }
  inst.validate();
  return inst;
}

InstanceConfig parse_config(const std::string& text) {
  KeyMap map = tokenize(text);
  InstanceConfig cfg;
  auto [def_params, def_device] = default_params();
  cfg.params = def_params;
  cfg.device = def_device;

  if (const Value* v = find(map, "mode")) {
    if (v->kind == Value::Word && v->word == "nocap")
      cfg.mode = Mode::NoCap;
    else if (v->kind == Value::Word && v->word == "cap")
      cfg.mode = Mode::WithCap;
    else
      fail(v->line, "'mode' must be nocap or cap");
  }

  SystemParams& p = cfg.params;
  p.c_ul = get_num(map, "c_ul_hz", p.c_ul);
  p.c_dl = get_num(map, "c_dl_hz", p.c_dl);
  p.c_total = get_num(map, "c_total_hz", p.c_total);
  p.r_ac = get_num(map, "r_ac_bps", p.r_ac);
  p.f_c = get_num(map, "f_c_cps", p.f_c);
  p.f_a_total = get_num(map, "f_a_total_cps", p.f_a_total);
  p.alpha = get_num(map, "alpha_j_per_bit", p.alpha);
  p.beta = get_num(map, "beta_j_per_bit", p.beta);
  p.lambda1 = get_num(map, "lambda1", p.lambda1);
  p.lambda2 = get_num(map, "lambda2", p.lambda2);
  p.lambda3 = get_num(map, "lambda3", p.lambda3);
  p.usage_d_in_bytes = get_bool(map, "usage_d_in_bytes", p.usage_d_in_bytes);

  cfg.device = read_device(map, "", cfg.device);
  cfg.eta_u = get_num(map, "eta_u", cfg.eta_u);
  cfg.eta_d = get_num(map, "eta_d", cfg.eta_d);
  cfg.rho = get_num(map, "rho", cfg.rho);
  double def_eta_u = cfg.eta_u;
  double def_eta_d = cfg.eta_d;
  double def_rho = cfg.rho;
  cfg.n_users = static_cast<int>(get_num(map, "n_users", cfg.n_users));
  cfg.m_tasks = static_cast<int>(get_num(map, "m_tasks", cfg.m_tasks));
  cfg.seed = static_cast<std::uint64_t>(get_num(map, "seed", 1));

  // Explicit user blocks make the instance fixed.
  if (map.count(user_key(0, "d_in_bits"))) {
    cfg.fixed = true;
    for (int i = 0;; ++i) {
      if (!map.count(user_key(i, "d_in_bits"))) break;
      UserProfile u;
      u.eta_u = get_num(map, user_key(i, "eta_u"), def_eta_u);
      u.eta_d = get_num(map, user_key(i, "eta_d"), def_eta_d);
      u.rho = get_num(map, user_key(i, "rho"), def_rho);
      u.device = read_device(map, user_key(i, ""), cfg.device);
      std::vector<double> d_in = get_array(map, user_key(i, "d_in_bits"));
      std::vector<double> d_out = get_array(map, user_key(i, "d_out_bits"));
      std::vector<double> cycles = get_array(map, user_key(i, "cycles"));
      if (d_out.size() != d_in.size() || cycles.size() != d_in.size())
        fail(map.at(user_key(i, "d_in_bits")).line,
             "user " + std::to_string(i) + " arrays must have equal length");
      for (size_t j = 0; j < d_in.size(); ++j)
        u.tasks.push_back({d_in[j], d_out[j], cycles[j]});
      cfg.users.push_back(u);
    }
    cfg.n_users = static_cast<int>(cfg.users.size());
  }

  for (const auto& [key, val] : map)
    if (!val.used) fail(val.line, "unknown key '" + key + "'");

  if (cfg.n_users < 1) fail(0, "n_users must be >= 1");
  if (cfg.m_tasks < 1) fail(0, "m_tasks must be >= 1");
  return cfg;
}

InstanceConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string serialize_instance(const Instance& inst) {
  std::ostringstream os;
  os.precision(17);
  os << "mode = " << (inst.mode == Mode::WithCap ? "cap" : "nocap") << "\n";
  const SystemParams& p = inst.params;
  os << "c_ul_hz = " << p.c_ul << "\n";
  os << "c_dl_hz = " << p.c_dl << "\n";
  os << "c_total_hz = " << p.c_total << "\n";
  os << "r_ac_bps = " << p.r_ac << "\n";
  os << "f_c_cps = " << p.f_c << "\n";
  os << "f_a_total_cps = " << p.f_a_total << "\n";
  os << "alpha_j_per_bit = " << p.alpha << "\n";
  os << "beta_j_per_bit = " << p.beta << "\n";
  os << "lambda1 = " << p.lambda1 << "\n";
  os << "lambda2 = " << p.lambda2 << "\n";
  os << "lambda3 = " << p.lambda3 << "\n";
  os << "usage_d_in_bytes = " << (p.usage_d_in_bytes ? "true" : "false") << "\n";
  for (int i = 0; i < inst.n_users(); ++i) {
    const UserProfile& u = inst.users[i];
    std::string pre = "user." + std::to_string(i) + ".";
    os << pre << "eta_u = " << u.eta_u << "\n";
    os << pre << "eta_d = " << u.eta_d << "\n";
    os << pre << "rho = " << u.rho << "\n";
    os << pre << "local_time_per_bit_s = " << u.device.local_time_per_bit << "\n";
    os << pre << "local_energy_per_bit_j = " << u.device.local_energy_per_bit << "\n";
    os << pre << "tx_energy_per_bit_j = " << u.device.tx_energy_per_bit << "\n";
    os << pre << "rx_energy_per_bit_j = " << u.device.rx_energy_per_bit << "\n";
    auto emit = [&](const char* name, auto field) {
      os << pre << name << " = [";
      for (size_t j = 0; j < u.tasks.size(); ++j)
        os << (j ? ", " : "") << field(u.tasks[j]);
      os << "]\n";
    };
    emit("d_in_bits", [](const TaskSpec& t) { return t.d_in; });
    emit("d_out_bits", [](const TaskSpec& t) { return t.d_out; });
    emit("cycles", [](const TaskSpec& t) { return t.cycles; });
  }
  return os.str();
}

}  // namespace offload
