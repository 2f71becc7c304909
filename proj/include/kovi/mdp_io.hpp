#pragma once

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kovi/mdp.hpp"
#include "kovi/numfmt.hpp"

namespace kovi {

// Line-based structured text: one "key = value" or "record idx... = values"
// per line.  Every float is written with 17 significant digits, so a round
// trip reproduces the instance bit for bit.
inline std::string mdp_to_text(const Mdp& mdp) {
  mdp.validate();
  const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon;
  std::ostringstream out;
  out << "kovi-mdp 1\n";
  out << "kernel.family = " << to_string(mdp.spec.family) << "\n";
  out << "kernel.lengthscale = " << format_g17(mdp.spec.lengthscale) << "\n";
  out << "kernel.scale = " << format_g17(mdp.spec.scale) << "\n";
  out << "kernel.offset = " << format_g17(mdp.spec.offset) << "\n";
  out << "horizon = " << H << "\n";
  out << "states = " << S << "\n";
  out << "actions = " << A << "\n";
  out << "state-dim = " << mdp.states[0].dim() << "\n";
  out << "action-dim = " << mdp.actions[0].dim() << "\n";
  out << "seed = " << mdp.seed << "\n";
  out << "norm-bound = " << format_g17(mdp.norm_bound) << "\n";
  for (int i = 0; i < S; ++i) {
    out << "state " << i << " =";
    for (double c : mdp.states[i].coords) out << " " << format_g17(c);
    out << "\n";
  }
  for (int i = 0; i < A; ++i) {
    out << "action " << i << " =";
    for (double c : mdp.actions[i].coords) out << " " << format_g17(c);
    out << "\n";
  }
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      out << "rewards " << h << " " << s << " =";
      for (int a = 0; a < A; ++a)
        out << " " << format_g17(mdp.reward(h, s, a));
      out << "\n";
    }
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        out << "transitions " << h << " " << s << " " << a << " =";
        for (double p : mdp.transition_row(h, s, a))
          out << " " << format_g17(p);
        out << "\n";
      }
  if (!mdp.certificates.empty()) {
    for (int h = 0; h < H; ++h)
      for (int sp = 0; sp < S; ++sp) {
        const RepresenterFunction& cert = mdp.certificates[h][sp];
        out << "cert " << h << " " << sp
            << " constant = " << format_g17(cert.constant) << "\n";
        out << "cert " << h << " " << sp << " weights =";
        for (double w : cert.weights) out << " " << format_g17(w);
        out << "\n";
        for (std::size_t j = 0; j < cert.centers.size(); ++j) {
          out << "cert " << h << " " << sp << " center " << j << " =";
          for (double c : cert.centers[j].coords)
            out << " " << format_g17(c);
          out << "\n";
        }
      }
  }
  return out.str();
}

namespace detail {

struct MdpParser {
  int line_no = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("mdp file line " + std::to_string(line_no) +
                                ": " + what);
  }

  double num(const std::string& tok) const {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
      fail("bad number '" + tok + "'");
    return v;
  }

  long integer(const std::string& tok) const {
    const double v = num(tok);
    const long i = static_cast<long>(v);
    if (static_cast<double>(i) != v) fail("expected integer, got '" + tok + "'");
    return i;
  }
};

}  // namespace detail

inline Mdp mdp_from_text(const std::string& text) {
  std::istringstream in(text);
  detail::MdpParser p;
  std::string line;

  std::getline(in, line);
  p.line_no = 1;
  if (line != "kovi-mdp 1") p.fail("expected header 'kovi-mdp 1'");

  Mdp mdp;
  int S = -1, A = -1, sd = -1, ad = -1;
  while (std::getline(in, line)) {
    ++p.line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) p.fail("expected 'key = values'");
    std::istringstream key(line.substr(0, eq));
    std::istringstream val(line.substr(eq + 1));
    std::string head;
    key >> head;
    std::vector<std::string> ktoks, vtoks;
    for (std::string t; key >> t;) ktoks.push_back(t);
    for (std::string t; val >> t;) vtoks.push_back(t);
    auto one = [&]() -> const std::string& {
      if (vtoks.size() != 1) p.fail("expected a single value");
      return vtoks[0];
    };

    if (head == "kernel.family") {
      mdp.spec.family = kernel_family_from_string(one());
    } else if (head == "kernel.lengthscale") {
      mdp.spec.lengthscale = p.num(one());
    } else if (head == "kernel.scale") {
      mdp.spec.scale = p.num(one());
    } else if (head == "kernel.offset") {
      mdp.spec.offset = p.num(one());
    } else if (head == "horizon") {
      mdp.horizon = static_cast<int>(p.integer(one()));
      mdp.rewards.resize(mdp.horizon);
      mdp.transitions.resize(mdp.horizon);
      mdp.certificates.resize(mdp.horizon);
    } else if (head == "states") {
      S = static_cast<int>(p.integer(one()));
      mdp.states.resize(S);
    } else if (head == "actions") {
      A = static_cast<int>(p.integer(one()));
      mdp.actions.resize(A);
    } else if (head == "state-dim") {
      sd = static_cast<int>(p.integer(one()));
    } else if (head == "action-dim") {
      ad = static_cast<int>(p.integer(one()));
    } else if (head == "seed") {
      mdp.seed = static_cast<std::uint64_t>(std::stoull(one()));
    } else if (head == "norm-bound") {
      mdp.norm_bound = p.num(one());
    } else if (head == "state" || head == "action") {
      if (ktoks.size() != 1) p.fail("expected '" + head + " <index>'");
      const int i = static_cast<int>(p.integer(ktoks[0]));
      auto& list = (head == "state") ? mdp.states : mdp.actions;
      const int want_dim = (head == "state") ? sd : ad;
      if (i < 0 || i >= static_cast<int>(list.size()))
        p.fail(head + " index out of range");
      if (static_cast<int>(vtoks.size()) != want_dim)
        p.fail(head + " has wrong dimension");
      for (const auto& t : vtoks) list[i].coords.push_back(p.num(t));
    } else if (head == "rewards") {
      if (ktoks.size() != 2) p.fail("expected 'rewards <h> <s>'");
      const int h = static_cast<int>(p.integer(ktoks[0]));
      const int s = static_cast<int>(p.integer(ktoks[1]));
      if (h < 0 || h >= mdp.horizon || s < 0 || s >= S)
        p.fail("rewards index out of range");
      if (static_cast<int>(vtoks.size()) != A)
        p.fail("rewards row has wrong length");
      auto& tab = mdp.rewards[h];
      if (tab.empty()) tab.assign(static_cast<std::size_t>(S) * A, 0.0);
      for (int a = 0; a < A; ++a) tab[s * A + a] = p.num(vtoks[a]);
    } else if (head == "transitions") {
      if (ktoks.size() != 3) p.fail("expected 'transitions <h> <s> <a>'");
      const int h = static_cast<int>(p.integer(ktoks[0]));
      const int s = static_cast<int>(p.integer(ktoks[1]));
      const int a = static_cast<int>(p.integer(ktoks[2]));
      if (h < 0 || h >= mdp.horizon || s < 0 || s >= S || a < 0 || a >= A)
        p.fail("transitions index out of range");
      if (static_cast<int>(vtoks.size()) != S)
        p.fail("transition row has wrong length");
      auto& tab = mdp.transitions[h];
      if (tab.empty())
        tab.assign(static_cast<std::size_t>(S) * A * S, 0.0);
      const std::size_t base = static_cast<std::size_t>(s * A + a) * S;
      for (int sp = 0; sp < S; ++sp) tab[base + sp] = p.num(vtoks[sp]);
    } else if (head == "cert") {
      if (ktoks.size() < 3) p.fail("expected 'cert <h> <s'> <field>'");
      const int h = static_cast<int>(p.integer(ktoks[0]));
      const int sp = static_cast<int>(p.integer(ktoks[1]));
      if (h < 0 || h >= mdp.horizon || sp < 0 || sp >= S)
        p.fail("cert index out of range");
      auto& list = mdp.certificates[h];
      if (list.empty()) list.resize(S);
      RepresenterFunction& cert = list[sp];
      cert.spec = mdp.spec;
      if (ktoks[2] == "constant") {
        cert.constant = p.num(one());
      } else if (ktoks[2] == "weights") {
        cert.weights.clear();
        for (const auto& t : vtoks) cert.weights.push_back(p.num(t));
        cert.centers.resize(cert.weights.size());
      } else if (ktoks[2] == "center") {
        if (ktoks.size() != 4) p.fail("expected 'cert <h> <s'> center <j>'");
        const std::size_t j =
            static_cast<std::size_t>(p.integer(ktoks[3]));
        if (j >= cert.centers.size()) p.fail("cert center index out of range");
        cert.centers[j].coords.clear();
        for (const auto& t : vtoks)
          cert.centers[j].coords.push_back(p.num(t));
      } else {
        p.fail("unknown cert field '" + ktoks[2] + "'");
      }
    } else {
      p.fail("unknown record '" + head + "'");
    }
  }

  if (S < 0 || A < 0 || sd < 0 || ad < 0)
    throw std::invalid_argument("mdp file: missing size declarations");
  // Drop the certificate block if none was present in the file.
  bool any_cert = false;
  for (const auto& per_h : mdp.certificates) any_cert |= !per_h.empty();
  if (!any_cert) mdp.certificates.clear();
  mdp.validate();
  return mdp;
}

inline void save_mdp(const Mdp& mdp, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_mdp: cannot open " + tmp);
    out << mdp_to_text(mdp);
    if (!out.flush())
      throw std::runtime_error("save_mdp: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("save_mdp: cannot move " + tmp + " to " + path);
}

inline Mdp load_mdp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_mdp: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return mdp_from_text(buf.str());
}

}  // namespace kovi
