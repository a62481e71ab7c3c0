#include "gsrecon/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gsrecon {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Shortest round-trip text by default, `digits` significant digits otherwise.
std::string fmt(double v, int digits = 0) {
  char buf[40];
  if (digits > 0) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
  }
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? end : buf);
}

std::optional<double> to_number(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split_fields(std::string line) {
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string f; ss >> f;) out.push_back(f);
  return out;
}

Error line_error(const std::string& source, const SectionedText::Line& l, const std::string& what) {
  return parse_error(source + ":" + std::to_string(l.number) + ": " + what + ": '" + l.text + "'");
}

std::vector<double> numbers(const std::string& source, const SectionedText::Line& l, std::size_t expected) {
  const auto fields = split_fields(l.text);
  if (fields.size() != expected)
    throw line_error(source, l, "expected " + std::to_string(expected) + " numbers");
  std::vector<double> v;
  for (const auto& f : fields) {
    const auto x = to_number(f);
    if (!x) throw line_error(source, l, "not a number '" + f + "'");
    v.push_back(*x);
  }
  return v;
}

/// Splits "key = value"; returns false for lines without '='.
bool key_value(const std::string& text, std::string& key, std::string& value) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) return false;
  key = trim(text.substr(0, eq));
  value = trim(text.substr(eq + 1));
  return !key.empty();
}

double number_value(const std::string& source, const SectionedText::Line& l, const std::string& value) {
  const auto v = to_number(value);
  if (!v) throw line_error(source, l, "not a number");
  return *v;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw config_error("'" + key + "' expects true or false, got '" + v + "'");
}

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw io_error(std::string("cannot open ") + what + " " + path.string());
  return in;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  out << text;
  if (!out) throw io_error("failed writing " + path.string());
}

const std::vector<std::string> kTableColumns = {"x", "A", "B", "n_e", "p", "f", "f2", "q"};
const std::vector<std::string> kTraceColumns = {"iteration", "J0",    "J1",     "J2",       "J3",   "J_Ip", "J_eps",
                                                "total",     "change", "u_norm", "psi_axis", "psi_b", "seconds"};

std::vector<std::vector<double>*> table_columns(ProfileTable& t) {
  return {&t.x, &t.A, &t.B, &t.ne, &t.p, &t.f, &t.f2, &t.q};
}

}  // namespace

const SectionedText::Section* SectionedText::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

SectionedText parse_sections(std::istream& in, const std::string& source) {
  SectionedText doc;
  doc.source = source;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        throw parse_error(source + ":" + std::to_string(number) + ": malformed section header: '" + line + "'");
      doc.sections.push_back({trim(t.substr(1, t.size() - 2)), {}});
      continue;
    }
    if (doc.sections.empty())
      throw parse_error(source + ":" + std::to_string(number) + ": data before the first section: '" + line + "'");
    doc.sections.back().lines.push_back({number, t});
  }
  return doc;
}

MeasurementSet parse_measurements(std::istream& in, const std::string& source) {
  const SectionedText doc = parse_sections(in, source);
  MeasurementSet m;
  bool have_ip = false, have_f0 = false, have_r0 = false;
  std::vector<double> h;
  for (const auto& sec : doc.sections) {
    if (sec.name == "globals") {
      for (const auto& l : sec.lines) {
        std::string key, value;
        if (!key_value(l.text, key, value)) throw line_error(source, l, "expected 'key = value'");
        const double v = number_value(source, l, value);
        if (key == "Ip") m.globals.Ip = v, have_ip = true;
        else if (key == "f0") m.globals.f0 = v, have_f0 = true;
        else if (key == "R0") m.globals.R0 = v, have_r0 = true;
        else throw line_error(source, l, "unknown global '" + key + "'");
      }
    } else if (sec.name == "boundary") {
      for (const auto& l : sec.lines) h.push_back(numbers(source, l, 1)[0]);
    } else if (sec.name == "probes") {
      for (const auto& l : sec.lines) {
        const auto v = numbers(source, l, 5);
        const Point n(v[2], v[3]);
        if (!(n.norm() > 0.0)) throw line_error(source, l, "probe normal has zero length");
        m.probes.push_back({Point(v[0], v[1]), n.normalized(), v[4]});
      }
    } else if (sec.name == "chord") {
      Chord c;
      for (const auto& l : sec.lines) {
        std::string key, value;
        if (key_value(l.text, key, value)) {
          if (key == "alpha") c.alpha = number_value(source, l, value);
          else if (key == "beta") c.beta = number_value(source, l, value);
          else throw line_error(source, l, "unknown chord field '" + key + "'");
          continue;
        }
        const auto v = numbers(source, l, 2);
        c.points.emplace_back(v[0], v[1]);
      }
      if (c.points.size() < 2)
        throw parse_error(source + ": chord " + std::to_string(m.chords.size()) + " needs at least two points");
      m.chords.push_back(std::move(c));
    } else if (sec.name == "mse") {
      for (const auto& l : sec.lines) {
        const auto v = numbers(source, l, 9);
        MsePoint p;
        p.position = Point(v[0], v[1]);
        std::copy(v.begin() + 2, v.begin() + 8, p.a.begin());
        p.gamma = v[8];
        m.mse.push_back(p);
      }
    } else {
      throw parse_error(source + ": unknown section [" + sec.name + "]");
    }
  }
  if (!have_ip || !have_f0 || !have_r0) throw parse_error(source + ": [globals] must define Ip, f0 and R0");
  m.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));
  return m;
}

MeasurementSet load_measurements(const std::filesystem::path& path) {
  auto in = open_input(path, "measurement file");
  return parse_measurements(in, path.string());
}

void write_measurements(std::ostream& out, const MeasurementSet& m) {
  out << "[globals]\nIp = " << fmt(m.globals.Ip) << "\nf0 = " << fmt(m.globals.f0) << "\nR0 = " << fmt(m.globals.R0)
      << "\n\n[boundary]\n";
  for (Eigen::Index i = 0; i < m.h.size(); ++i) out << fmt(m.h[i]) << '\n';
  out << "\n[probes]\n# r z nr nz g\n";
  for (const auto& p : m.probes)
    out << fmt(p.position.x()) << ' ' << fmt(p.position.y()) << ' ' << fmt(p.normal.x()) << ' ' << fmt(p.normal.y())
        << ' ' << fmt(p.g) << '\n';
  for (const auto& c : m.chords) {
    out << "\n[chord]\n";
    for (const auto& p : c.points) out << fmt(p.x()) << ' ' << fmt(p.y()) << '\n';
    out << "alpha = " << fmt(c.alpha) << "\nbeta = " << fmt(c.beta) << '\n';
  }
  out << "\n[mse]\n# r z a1 a2 a3 a4 a5 a6 gamma\n";
  for (const auto& p : m.mse) {
    out << fmt(p.position.x()) << ' ' << fmt(p.position.y());
    for (double a : p.a) out << ' ' << fmt(a);
    out << ' ' << fmt(p.gamma) << '\n';
  }
}

void save_measurements(const MeasurementSet& meas, const std::filesystem::path& path) {
  std::ostringstream ss;
  write_measurements(ss, meas);
  write_file(path, ss.str());
}

void apply_config_entry(SolverConfig& cfg, const std::string& key, const std::string& value) {
  auto num = [&]() {
    const auto v = to_number(value);
    if (!v) throw config_error("'" + key + "' expects a number, got '" + value + "'");
    return *v;
  };
  auto integer = [&]() {
    const double v = num();
    if (v != static_cast<int>(v)) throw config_error("'" + key + "' expects an integer, got '" + value + "'");
    return static_cast<int>(v);
  };
  if (key == "mode") cfg.mode = parse_mode(value);
  else if (key == "K_probe") cfg.K_probe = num();
  else if (key == "K_polarimetry") cfg.K_polarimetry = num();
  else if (key == "K_interferometry") cfg.K_interferometry = num();
  else if (key == "K_mse") cfg.K_mse = num();
  else if (key == "K_Ip") cfg.K_Ip = num();
  else if (key == "eps_a") cfg.eps_a = num();
  else if (key == "eps_b") cfg.eps_b = num();
  else if (key == "eps_ne") cfg.eps_ne = num();
  else if (key == "max_iterations") cfg.max_iterations = integer();
  else if (key == "rt_iterations") cfg.rt_iterations = integer();
  else if (key == "tolerance") cfg.tolerance = num();
  else if (key == "degree") cfg.degree = integer();
  else if (key == "count_a") cfg.count_a = integer();
  else if (key == "count_b") cfg.count_b = integer();
  else if (key == "count_ne") cfg.count_ne = integer();
  else if (key == "use_polarimetry") cfg.use_polarimetry = parse_bool(value, key);
  else if (key == "use_interferometry") cfg.use_interferometry = parse_bool(value, key);
  else if (key == "use_mse") cfg.use_mse = parse_bool(value, key);
  else if (key == "record_states") cfg.record_states = parse_bool(value, key);
  else throw config_error("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const SolverConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {{"mode", to_string(c.mode)},
          {"K_probe", fmt(c.K_probe)},
          {"K_polarimetry", fmt(c.K_polarimetry)},
          {"K_interferometry", fmt(c.K_interferometry)},
          {"K_mse", fmt(c.K_mse)},
          {"K_Ip", fmt(c.K_Ip)},
          {"eps_a", fmt(c.eps_a)},
          {"eps_b", fmt(c.eps_b)},
          {"eps_ne", fmt(c.eps_ne)},
          {"max_iterations", std::to_string(c.max_iterations)},
          {"rt_iterations", std::to_string(c.rt_iterations)},
          {"tolerance", fmt(c.tolerance)},
          {"degree", std::to_string(c.degree)},
          {"count_a", std::to_string(c.count_a)},
          {"count_b", std::to_string(c.count_b)},
          {"count_ne", std::to_string(c.count_ne)},
          {"use_polarimetry", b(c.use_polarimetry)},
          {"use_interferometry", b(c.use_interferometry)},
          {"use_mse", b(c.use_mse)},
          {"record_states", b(c.record_states)}};
}

SolverConfig parse_config(std::istream& in, const std::string& source, SolverConfig cfg) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    std::string key, value;
    if (!key_value(t, key, value))
      throw config_error(source + ":" + std::to_string(number) + ": expected 'key = value': '" + line + "'");
    try {
      apply_config_entry(cfg, key, value);
    } catch (const Error& e) {
      throw config_error(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

SolverConfig load_config(const std::filesystem::path& path, SolverConfig base) {
  auto in = open_input(path, "config file");
  return parse_config(in, path.string(), base);
}

void write_config(std::ostream& out, const SolverConfig& cfg) {
  for (const auto& [k, v] : config_entries(cfg)) out << k << " = " << v << '\n';
}

std::optional<double> ResultFile::scalar(const std::string& key) const {
  for (const auto& [k, v] : scalars)
    if (k == key) return to_number(v);
  return std::nullopt;
}

ResultFile make_result(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles,
                       const IterationTrace* trace, int table_points) {
  ResultFile r;
  const DerivedScalars s = global_scalars(mesh, flux, profiles);
  auto add = [&](const char* k, double v) { r.scalars.emplace_back(k, fmt(v, 12)); };
  add("Ip", s.Ip);
  add("area", s.area);
  add("volume", s.volume);
  add("perimeter", s.perimeter);
  add("beta_p", s.beta_p);
  add("l_i", s.l_i);
  add("beta_p_plus_li_over_2", s.beta_p_plus_li_over_2);
  add("R_axis", s.R_axis);
  add("Z_axis", s.Z_axis);
  if (s.R_x) add("R_x", *s.R_x);
  if (s.Z_x) add("Z_x", *s.Z_x);
  add("shafranov_shift", s.shafranov_shift);
  add("triangularity_upper", s.triangularity_upper);
  add("triangularity_lower", s.triangularity_lower);
  add("elongation", s.elongation);
  add("q_axis", s.q_axis);
  add("q95", s.q95);
  add("psi_axis", s.psi_axis);
  add("psi_b", s.psi_b);
  r.scalars.emplace_back("boundary_kind", s.boundary_kind);
  r.profiles = profile_table(mesh, flux, profiles, table_points);
  r.psi = flux.psi;
  r.boundary = flux.boundary_contour.points;
  r.coefficients = attach_flux(profiles, flux);
  if (trace) r.trace = trace->records;
  return r;
}

void write_result(std::ostream& out, const ResultFile& r) {
  out << "[scalars]\n";
  for (const auto& [k, v] : r.scalars) out << k << " = " << v << '\n';

  out << "\n[profiles]\n";
  for (std::size_t c = 0; c < kTableColumns.size(); ++c) out << (c ? "," : "") << kTableColumns[c];
  out << '\n';
  ProfileTable t = r.profiles;
  const auto cols = table_columns(t);
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << fmt((*cols[c])[i], 12);
    out << '\n';
  }

  out << "\n[psi]\n";
  for (Eigen::Index i = 0; i < r.psi.size(); ++i) out << fmt(r.psi[i]) << '\n';

  out << "\n[boundary_contour]\nr,z\n";
  for (const auto& p : r.boundary) out << fmt(p.x(), 12) << ',' << fmt(p.y(), 12) << '\n';

  if (r.coefficients) {
    const ProfileSet& ps = *r.coefficients;
    out << "\n[coefficients]\ndegree = " << ps.basis.degree() << "\ncount_a = " << ps.basis.count(ProfileBlock::A)
        << "\ncount_b = " << ps.basis.count(ProfileBlock::B) << "\ncount_ne = " << ps.basis.count(ProfileBlock::Ne)
        << "\nR0 = " << fmt(ps.R0) << "\nf0 = " << fmt(ps.f0) << "\npsi_axis = " << fmt(ps.psi_axis)
        << "\npsi_b = " << fmt(ps.psi_b) << "\nu =";
    for (Eigen::Index i = 0; i < ps.u.size(); ++i) out << ' ' << fmt(ps.u[i]);
    out << '\n';
  }

  if (!r.trace.empty()) {
    out << "\n[trace]\n";
    for (std::size_t c = 0; c < kTraceColumns.size(); ++c) out << (c ? "," : "") << kTraceColumns[c];
    out << '\n';
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      const auto& e = r.trace[i];
      out << i;
      for (double v : {e.J0, e.J1, e.J2, e.J3, e.J_Ip, e.J_eps, e.total, e.change, e.u_norm, e.psi_axis, e.psi_b,
                       e.seconds})
        out << ',' << fmt(v);
      out << '\n';
    }
  }
}

void save_result(const ResultFile& result, const std::filesystem::path& path) {
  std::ostringstream ss;
  write_result(ss, result);
  write_file(path, ss.str());
}

ResultFile parse_result(std::istream& in, const std::string& source) {
  const SectionedText doc = parse_sections(in, source);
  ResultFile r;
  auto csv_body = [&](const SectionedText::Section& sec, const std::vector<std::string>& header) {
    if (sec.lines.empty()) throw parse_error(source + ": [" + sec.name + "] is missing its header");
    const auto got = split_fields(sec.lines.front().text);
    if (got != header) throw line_error(source, sec.lines.front(), "unexpected column header");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < sec.lines.size(); ++i) rows.push_back(numbers(source, sec.lines[i], header.size()));
    return rows;
  };
  for (const auto& sec : doc.sections) {
    if (sec.name == "scalars") {
      for (const auto& l : sec.lines) {
        std::string k, v;
        if (!key_value(l.text, k, v)) throw line_error(source, l, "expected 'key = value'");
        r.scalars.emplace_back(k, v);
      }
    } else if (sec.name == "profiles") {
      const auto cols = table_columns(r.profiles);
      for (const auto& row : csv_body(sec, kTableColumns))
        for (std::size_t c = 0; c < cols.size(); ++c) cols[c]->push_back(row[c]);
    } else if (sec.name == "psi") {
      r.psi.resize(static_cast<Eigen::Index>(sec.lines.size()));
      for (std::size_t i = 0; i < sec.lines.size(); ++i) r.psi[i] = numbers(source, sec.lines[i], 1)[0];
    } else if (sec.name == "boundary_contour") {
      for (const auto& row : csv_body(sec, {"r", "z"})) r.boundary.emplace_back(row[0], row[1]);
    } else if (sec.name == "coefficients") {
      std::map<std::string, std::pair<std::string, SectionedText::Line>> kv;
      for (const auto& l : sec.lines) {
        std::string k, v;
        if (!key_value(l.text, k, v)) throw line_error(source, l, "expected 'key = value'");
        kv.insert_or_assign(k, std::make_pair(v, l));
      }
      auto get = [&](const std::string& k) {
        const auto it = kv.find(k);
        if (it == kv.end()) throw parse_error(source + ": [coefficients] is missing '" + k + "'");
        return it->second;
      };
      auto num = [&](const std::string& k) {
        const auto [v, l] = get(k);
        return number_value(source, l, v);
      };
      auto integer = [&](const std::string& k) { return static_cast<int>(num(k)); };
      ProfileSet ps;
      try {
        ps.basis = ProfileBasis(integer("degree"), integer("count_a"), integer("count_b"), integer("count_ne"));
      } catch (const Error& e) {
        throw parse_error(source + ": invalid spline basis: " + e.what());
      }
      ps.R0 = num("R0");
      ps.f0 = num("f0");
      ps.psi_axis = num("psi_axis");
      ps.psi_b = num("psi_b");
      const auto [u_text, u_line] = get("u");
      const auto fields = split_fields(u_text);
      if (static_cast<int>(fields.size()) != ps.basis.total())
        throw line_error(source, u_line, "coefficient count does not match the basis");
      ps.u.resize(ps.basis.total());
      for (int i = 0; i < ps.basis.total(); ++i) ps.u[i] = number_value(source, u_line, fields[i]);
      r.coefficients = std::move(ps);
    } else if (sec.name == "trace") {
      for (const auto& row : csv_body(sec, kTraceColumns)) {
        IterationRecord e;
        double* dst[] = {&e.J0,     &e.J1,       &e.J2,    &e.J3,     &e.J_Ip,  &e.J_eps,
                         &e.total,  &e.change,   &e.u_norm, &e.psi_axis, &e.psi_b, &e.seconds};
        for (std::size_t c = 0; c < 12; ++c) *dst[c] = row[c + 1];
        r.trace.push_back(e);
      }
    } else {
      throw parse_error(source + ": unknown section [" + sec.name + "]");
    }
  }
  return r;
}

ResultFile load_result(const std::filesystem::path& path) {
  auto in = open_input(path, "result file");
  return parse_result(in, path.string());
}

std::vector<ResultDifference> compare_results(const ResultFile& a, const ResultFile& b, double rel_tol,
                                              double abs_tol) {
  std::vector<ResultDifference> out;
  auto check = [&](const std::string& field, double va, double vb, double err, double scale) {
    if (!(err <= abs_tol + rel_tol * scale)) out.push_back({field, va, vb, err});
  };
  for (const auto& [key, va_text] : a.scalars) {
    std::optional<std::string> vb_text;
    for (const auto& [k, v] : b.scalars)
      if (k == key) vb_text = v;
    if (!vb_text) {
      out.push_back({key + " (missing)", 0.0, 0.0, 1.0});
      continue;
    }
    const auto va = to_number(va_text), vb = to_number(*vb_text);
    if (va && vb) check("scalars." + key, *va, *vb, std::abs(*va - *vb), std::abs(*va));
    else if (va_text != *vb_text) out.push_back({"scalars." + key + " (" + va_text + " vs " + *vb_text + ")", 0, 0, 1});
  }

  ProfileTable ta = a.profiles, tb = b.profiles;
  const auto ca = table_columns(ta), cb = table_columns(tb);
  if (ta.x.size() != tb.x.size()) {
    out.push_back({"profiles (row count)", double(ta.x.size()), double(tb.x.size()), 1.0});
  } else {
    for (std::size_t c = 0; c < ca.size(); ++c) {
      double err = 0.0, scale = 0.0, wa = 0.0, wb = 0.0;
      for (std::size_t i = 0; i < ta.x.size(); ++i) {
        const double d = std::abs((*ca[c])[i] - (*cb[c])[i]);
        if (d >= err) err = d, wa = (*ca[c])[i], wb = (*cb[c])[i];
        scale = std::max(scale, std::abs((*ca[c])[i]));
      }
      check("profiles." + kTableColumns[c], wa, wb, err, scale);
    }
  }

  if (a.psi.size() != b.psi.size()) {
    out.push_back({"psi (node count)", double(a.psi.size()), double(b.psi.size()), 1.0});
  } else if (a.psi.size() > 0) {
    Eigen::Index i = 0;
    const double err = (a.psi - b.psi).cwiseAbs().maxCoeff(&i);
    check("psi", a.psi[i], b.psi[i], err, a.psi.cwiseAbs().maxCoeff());
  }

  if (!a.boundary.empty() && !b.boundary.empty()) {
    const double d = hausdorff_distance(a.boundary, b.boundary);
    if (!(d <= abs_tol)) out.push_back({"boundary_contour (Hausdorff)", 0.0, 0.0, d});
  } else if (a.boundary.empty() != b.boundary.empty()) {
    out.push_back({"boundary_contour (missing)", 0.0, 0.0, 1.0});
  }
  return out;
}

void save_contour_csv(const Polyline& contour, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss << "r,z\n";
  for (const auto& p : contour) ss << fmt(p.x(), 12) << ',' << fmt(p.y(), 12) << '\n';
  write_file(path, ss.str());
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string() + " for hashing");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void save_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = GSRECON_VERSION;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  j["config"] = cfg;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  nlohmann::ordered_json timings = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.timings) timings[k] = v;
  j["timings_seconds"] = timings;
  j["warnings"] = m.warnings;
  j["notes"] = m.notes;
  write_file(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace gsrecon
