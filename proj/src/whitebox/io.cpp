#include <fstream>
#include <sstream>

#include "qzo/whitebox.hpp"

namespace qzo {

namespace {

// Next non-empty line with '#' comments stripped; false at EOF.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (auto p = line.find('#'); p != std::string::npos) line.erase(p);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void fail(const std::string& what, int lineno) {
  throw LoadError(what + " (line " + std::to_string(lineno) + ")");
}

std::vector<double> read_numbers(std::istringstream& ss, const std::string& what, int lineno) {
  std::vector<double> v;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) fail("bad number '" + tok + "' in " + what, lineno);
    } catch (const std::logic_error&) {
      fail("bad number '" + tok + "' in " + what, lineno);
    }
  }
  return v;
}

// Row of `count` numbers, optionally prefixed by `label`.
Vector read_row(std::istream& in, const std::string& label, int count, int& lineno) {
  std::string line;
  if (!next_line(in, line, lineno)) fail("missing " + label + " row", lineno);
  std::istringstream ss(line);
  std::string first;
  ss >> first;
  if (first != label) ss = std::istringstream(line);
  auto v = read_numbers(ss, label, lineno);
  if (int(v.size()) != count)
    fail(label + " row needs " + std::to_string(count) + " values, got " + std::to_string(v.size()), lineno);
  return Eigen::Map<Vector>(v.data(), count);
}

template <class F>
auto with_file(const std::string& path, F f) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return f(in);
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

}  // namespace

SdpInstance parse_sdp(std::istream& in) {
  int lineno = 0;
  std::string line, tag;
  if (!next_line(in, line, lineno)) fail("empty SDP file", lineno);
  SdpInstance s;
  {
    std::istringstream ss(line);
    if (!(ss >> tag >> s.m >> s.n >> s.r_p >> s.r_d) || tag != "SDP") fail("expected 'SDP m n r_p r_d'", lineno);
    if (s.m < 1 || s.n < 1) fail("m and n must be positive", lineno);
  }
  s.b = read_row(in, "b", s.m, lineno);
  s.C = Matrix::Zero(s.n, s.n);
  s.A.assign(s.m, Matrix::Zero(s.n, s.n));
  Matrix* cur = nullptr;
  while (next_line(in, line, lineno)) {
    std::istringstream ss(line);
    std::string first;
    ss >> first;
    if (first == "MAT") {
      int i = -1;
      if (!(ss >> i) || i < 0 || i > s.m) fail("bad MAT index", lineno);
      cur = i == 0 ? &s.C : &s.A[i - 1];
      continue;
    }
    if (!cur) fail("entry before any MAT block", lineno);
    ss = std::istringstream(line);
    int r = -1, c = -1;
    double v = 0.0;
    if (!(ss >> r >> c >> v) || r < 0 || c < 0 || r >= s.n || c >= s.n) fail("bad 'row col value' entry", lineno);
    (*cur)(r, c) = v;
    (*cur)(c, r) = v;
  }
  s.compute_sparsity();
  s.validate();
  return s;
}

LpInstance parse_lp(std::istream& in) {
  int lineno = 0;
  std::string line, tag;
  if (!next_line(in, line, lineno)) fail("empty LP file", lineno);
  int m = 0, n = 0;
  LpInstance lp;
  {
    std::istringstream ss(line);
    if (!(ss >> tag >> m >> n >> lp.r_p >> lp.r_d) || tag != "LP") fail("expected 'LP m n r_p r_d'", lineno);
    if (m < 1 || n < 1) fail("m and n must be positive", lineno);
  }
  lp.b = read_row(in, "b", m, lineno);
  lp.c = read_row(in, "c", n, lineno);
  lp.A.resize(m, n);
  for (int i = 0; i < m; ++i) lp.A.row(i) = read_row(in, "A", n, lineno).transpose();
  lp.validate();
  return lp;
}

ZsgInstance parse_zsg(std::istream& in) {
  int lineno = 0;
  std::string line;
  std::vector<std::vector<double>> rows;
  while (next_line(in, line, lineno)) {
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    rows.push_back(read_numbers(ss, "payoff row", lineno));
    if (rows.back().size() != rows.front().size()) fail("ragged payoff matrix", lineno);
  }
  if (rows.empty() || rows.front().empty()) fail("empty payoff matrix", lineno);
  ZsgInstance z;
  z.A.resize(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) z.A(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  z.validate();
  return z;
}

SdpInstance load_sdp(const std::string& path) { return with_file(path, [](std::istream& in) { return parse_sdp(in); }); }
LpInstance load_lp(const std::string& path) { return with_file(path, [](std::istream& in) { return parse_lp(in); }); }
ZsgInstance load_zsg(const std::string& path) { return with_file(path, [](std::istream& in) { return parse_zsg(in); }); }

void write_sdp(std::ostream& out, const SdpInstance& s) {
  out.precision(17);
  out << "SDP " << s.m << ' ' << s.n << ' ' << s.r_p << ' ' << s.r_d << "\nb";
  for (double v : s.b) out << ' ' << v;
  out << '\n';
  auto block = [&](int idx, const Matrix& M) {
    out << "MAT " << idx << '\n';
    for (int r = 0; r < s.n; ++r)
      for (int c = r; c < s.n; ++c)
        if (M(r, c) != 0.0) out << r << ' ' << c << ' ' << M(r, c) << '\n';
  };
  block(0, s.C);
  for (int i = 0; i < s.m; ++i) block(i + 1, s.A[i]);
}

void write_lp(std::ostream& out, const LpInstance& lp) {
  out.precision(17);
  out << "LP " << lp.m() << ' ' << lp.n() << ' ' << lp.r_p << ' ' << lp.r_d << "\nb";
  for (double v : lp.b) out << ' ' << v;
  out << "\nc";
  for (double v : lp.c) out << ' ' << v;
  out << '\n';
  for (int i = 0; i < lp.m(); ++i) {
    for (int j = 0; j < lp.n(); ++j) out << (j ? " " : "") << lp.A(i, j);
    out << '\n';
  }
}

void write_certificate(std::ostream& out, const DualCertificate& c) {
  out.precision(17);
  out << "y0 " << c.y0 << "\ny";
  for (double v : c.y) out << ' ' << v;
  out << "\nobjective " << c.objective << "\nmin_slack_eig " << c.min_slack_eig
      << "\ncharged_queries " << c.charged_queries << "\nactual_evals " << c.actual_evals << '\n';
  if (c.data_queries) out << "data_queries " << c.data_queries << '\n';
  out << "theta " << c.theta_used << '\n';
  if (c.rd_audit_failed) out << "warning r_d_audit_failed\n";
}

}  // namespace qzo
