#include "kam/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "kam/errors.hpp"

namespace kam {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double parse_double(const std::string& s, int line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  }
}

long long parse_int(const std::string& s, int line, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  }
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

// Parses `magic v1 key=value ...` into the requested keys.
std::map<std::string, std::string> parse_header(const std::string& line, const std::string& magic,
                                                const std::vector<std::string>& keys) {
  const auto tok = tokens(line);
  if (tok.size() < 2 || tok[0] != magic || tok[1] != "v1")
    throw ParseError("expected header '" + magic + " v1 ...'", 1);
  std::map<std::string, std::string> kv;
  for (std::size_t i = 2; i < tok.size(); ++i) {
    const auto eq = tok[i].find('=');
    if (eq == std::string::npos) throw ParseError("header entry without '=': " + tok[i], 1);
    kv[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
  }
  for (const auto& k : keys)
    if (!kv.count(k)) throw ParseError("header is missing " + k + "=", 1);
  return kv;
}

bool is_representative(std::span<const int> k) {
  for (int v : k)
    if (v != 0) return v > 0;
  return true;
}

bool getline_nonempty(std::istream& is, std::string& line, int& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

void dump_value(std::string& out, const nlohmann::json& j, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_value(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_value(out, v, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt("%.17g", v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

void write_field(std::ostream& os, const FourierField& field) {
  const int n = field.dim();
  os << "torusfield v1 n=" << n << " s=" << fmt("%.17g", field.width()) << " kmax=" << field.kmax() << '\n';
  std::vector<std::pair<std::vector<int>, std::size_t>> rows;
  std::vector<int> k(n);
  const auto data = field.data();
  for (std::size_t idx = 0; idx < field.mode_count(); ++idx) {
    bool nz = false;
    for (int j = 0; j < n; ++j) nz = nz || data[idx * n + j] != Complex{};
    if (!nz) continue;
    field.mode_at(idx, k);
    if (!is_representative(k)) continue;
    rows.emplace_back(k, idx);
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [mode, idx] : rows) {
    std::string line;
    for (int j = 0; j < n; ++j) line += (j ? " " : "") + std::to_string(mode[j]);
    for (int j = 0; j < n; ++j) {
      line += ' ' + fmt("%.16e", data[idx * n + j].real());
      line += ' ' + fmt("%.16e", data[idx * n + j].imag());
    }
    os << line << '\n';
  }
}

FourierField read_field(std::istream& is) {
  std::string line;
  int lineno = 0;
  if (!getline_nonempty(is, line, lineno)) throw ParseError("empty field file", 1);
  const auto hdr = parse_header(line, "torusfield", {"n", "s", "kmax"});
  const long long n = parse_int(hdr.at("n"), lineno, "n");
  const double s = parse_double(hdr.at("s"), lineno, "s");
  const long long kmax = parse_int(hdr.at("kmax"), lineno, "kmax");
  if (n < 1 || n > 16) throw ParseError("n out of range", lineno);
  if (!(s > 0.0)) throw ParseError("s must be > 0", lineno);
  if (kmax < 0 || kmax > 4096) throw ParseError("kmax out of range", lineno);
  FourierField field(static_cast<int>(n), s, static_cast<int>(kmax));

  std::map<std::vector<int>, std::pair<std::vector<Complex>, int>> seen;
  while (getline_nonempty(is, line, lineno)) {
    const auto tok = tokens(line);
    if (tok.size() != static_cast<std::size_t>(3 * n))
      throw ParseError("expected " + std::to_string(3 * n) + " entries, got " + std::to_string(tok.size()), lineno);
    std::vector<int> k(n);
    for (int j = 0; j < n; ++j) {
      const long long v = parse_int(tok[j], lineno, "mode index");
      if (std::llabs(v) > kmax) throw ParseError("mode index beyond kmax", lineno);
      k[j] = static_cast<int>(v);
    }
    std::vector<Complex> c(n);
    for (int j = 0; j < n; ++j)
      c[j] = {parse_double(tok[n + 2 * j], lineno, "coefficient"),
              parse_double(tok[n + 2 * j + 1], lineno, "coefficient")};
    if (seen.count(k)) throw ParseError("duplicate mode", lineno);
    seen[k] = {c, lineno};
  }

  for (const auto& [k, entry] : seen) {
    const auto& [c, ln] = entry;
    std::vector<int> mk(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) mk[j] = -k[j];
    const bool zero = std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
    if (zero) {
      for (const auto& v : c)
        if (v.imag() != 0.0) throw RealityError("line " + std::to_string(ln) + ": mode 0 must be real");
    }
    auto it = seen.find(mk);
    if (!zero && it != seen.end()) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        const Complex a = c[j], b = std::conj(it->second.first[j]);
        const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
        if (std::abs(a - b) > 1e-13 * scale)
          throw RealityError("line " + std::to_string(ln) + ": coefficient at -k is not the conjugate of k");
      }
      if (!is_representative(k)) continue;
    }
    field.set_mode(k, c);
  }
  return field;
}

void save_field(const std::string& path, const FourierField& field) {
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot write " + path);
  write_field(os, field);
}

FourierField load_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open " + path);
  return read_field(is);
}

void write_frequency(std::ostream& os, const FrequencyVector& alpha) {
  os << "freq v1 n=" << alpha.dim() << " tau=" << fmt("%.17g", alpha.tau) << " gamma=" << fmt("%.17g", alpha.gamma)
     << " gammabar=" << fmt("%.17g", alpha.gamma_bar) << '\n';
  for (std::size_t i = 0; i < alpha.alpha_tilde.size(); ++i)
    os << (i ? " " : "") << fmt("%.17g", alpha.alpha_tilde[i]);
  os << '\n';
}

FrequencyVector read_frequency(std::istream& is) {
  std::string line;
  int lineno = 0;
  if (!getline_nonempty(is, line, lineno)) throw ParseError("empty frequency file", 1);
  const auto hdr = parse_header(line, "freq", {"n", "tau", "gamma", "gammabar"});
  const long long n = parse_int(hdr.at("n"), lineno, "n");
  if (n < 2 || n > 16) throw ParseError("n out of range", lineno);
  FrequencyVector f;
  f.tau = parse_double(hdr.at("tau"), lineno, "tau");
  f.gamma = parse_double(hdr.at("gamma"), lineno, "gamma");
  f.gamma_bar = parse_double(hdr.at("gammabar"), lineno, "gammabar");
  while (static_cast<long long>(f.alpha_tilde.size()) < n - 1 && getline_nonempty(is, line, lineno))
    for (const auto& t : tokens(line)) f.alpha_tilde.push_back(parse_double(t, lineno, "frequency entry"));
  if (static_cast<long long>(f.alpha_tilde.size()) != n - 1)
    throw ParseError("expected " + std::to_string(n - 1) + " frequency entries", lineno);
  if (getline_nonempty(is, line, lineno)) throw ParseError("trailing content", lineno);
  f.validate();
  return f;
}

void save_frequency(const std::string& path, const FrequencyVector& alpha) {
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot write " + path);
  write_frequency(os, alpha);
}

FrequencyVector load_frequency(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open " + path);
  return read_frequency(is);
}

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump_value(out, j, indent, 0);
  return out;
}

}  // namespace kam
