#include "ucst/textio.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ucst {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

struct Line {
  std::size_t number;
  std::string key;
  std::string value;
};

std::vector<Line> key_lines(std::string_view text) {
  std::vector<Line> out;
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++n;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw InputError("line " + std::to_string(n) + ": expected 'key: value'");
    out.push_back({n, trim(line.substr(0, colon)), trim(line.substr(colon + 1))});
  }
  return out;
}

[[noreturn]] void fail(const Line& l, const std::string& msg) {
  throw InputError("line " + std::to_string(l.number) + ": " + msg);
}

bool valid_state_name(const std::string& n) {
  if (n.empty() || n.find("->") != std::string::npos) return false;
  for (char c : n)
    if (std::isspace(static_cast<unsigned char>(c)) || c == ':') return false;
  return true;
}

std::string test_regex(const Rule& r) {
  switch (r.test_class()) {
    case TestClass::Zero: return "EPS";
    case TestClass::NonEmpty: return "ANY+";
    case TestClass::Even: return "(ANY ANY)*";
    case TestClass::Odd: return "ANY (ANY ANY)*";
    case TestClass::Head: return r.test_lang().alphabet().name(std::get<TestAction>(r.action).head) + " ANY*";
    case TestClass::Other: return to_regex(r.test_lang());
  }
  return "NONE";
}

std::string lang_regex(const Nfa& a) {
  if (language_equal(a, Nfa::epsilon(a.alphabet())).equal) return "EPS";
  if (language_equal(a, Nfa::universal(a.alphabet())).equal) return "ANY*";
  return to_regex(a);
}

}  // namespace

UcstFile parse_ucst(std::string_view text) {
  UcstFile f;
  Ucst& s = f.instance.system;
  struct PendingRule {
    Line line;
    Agent agent;
    std::string name, src, dst, action;
  };
  std::vector<PendingRule> rules;
  std::map<std::string, Line> langs;
  std::optional<Line> instance_line;
  bool have_alphabet = false;
  for (const Line& l : key_lines(text)) {
    if (l.key == "alphabet") {
      if (have_alphabet) fail(l, "duplicate alphabet");
      have_alphabet = true;
      for (auto& n : split_ws(l.value)) {
        if (!valid_symbol_name(n)) fail(l, "invalid symbol name '" + n + "'");
        if (s.alphabet.contains(n)) fail(l, "duplicate symbol '" + n + "'");
        s.alphabet.add(n);
      }
    } else if (l.key == "sender" || l.key == "receiver") {
      for (auto& n : split_ws(l.value)) {
        if (!valid_state_name(n)) fail(l, "invalid state name '" + n + "'");
        try {
          l.key == "sender" ? s.add_sender_state(n) : s.add_receiver_state(n);
        } catch (const InputError& e) {
          fail(l, e.what());
        }
      }
    } else if (l.key.rfind("rule", 0) == 0) {
      auto head = split_ws(l.key);
      if (head.size() < 2 || head.size() > 3 || head[0] != "rule" || (head[1] != "s" && head[1] != "r"))
        fail(l, "expected 'rule s [NAME]: ...' or 'rule r [NAME]: ...'");
      auto arrow = l.value.find("->");
      auto colon = l.value.find(':');
      if (arrow == std::string::npos || colon == std::string::npos || colon < arrow)
        fail(l, "expected 'SOURCE -> TARGET : ACTION'");
      rules.push_back({l, head[1] == "s" ? Agent::Sender : Agent::Receiver,
                       head.size() == 3 ? head[2] : "", trim(l.value.substr(0, arrow)),
                       trim(l.value.substr(arrow + 2, colon - arrow - 2)), trim(l.value.substr(colon + 1))});
    } else if (l.key == "instance") {
      if (instance_line) fail(l, "duplicate instance line");
      instance_line = l;
    } else if (l.key == "U" || l.key == "V" || l.key == "Up" || l.key == "Vp") {
      if (langs.count(l.key)) fail(l, "duplicate " + l.key);
      langs.emplace(l.key, l);
    } else if (l.key == "mode") {
      if (l.value == "lossy") f.mode = Mode::Lossy;
      else if (l.value == "reliable") f.mode = Mode::Reliable;
      else if (l.value == "write-lossy") f.mode = Mode::WriteLossy;
      else fail(l, "unknown mode '" + l.value + "'");
    } else if (l.key == "generated") {
      f.generated = l.value == "yes" || l.value == "true";
    } else {
      fail(l, "unknown key '" + l.key + "'");
    }
  }
  if (!have_alphabet) throw InputError("missing 'alphabet:' line");
  if (!f.generated)
    for (const char* r : {"z", "n", "#"})
      if (s.alphabet.contains(r))
        throw InputError(std::string("symbol '") + r +
                         "' is reserved for the reductions; rename it (e.g. '" + r + "0')");

  for (auto& pr : rules) {
    auto find = [&](const std::string& n) {
      auto id = pr.agent == Agent::Sender ? s.find_sender_state(n) : s.find_receiver_state(n);
      if (!id) fail(pr.line, "unknown " + std::string(pr.agent == Agent::Sender ? "sender" : "receiver") +
                                 " state '" + n + "'");
      return *id;
    };
    const StateId src = find(pr.src), dst = find(pr.dst);
    if (!pr.name.empty() && !valid_symbol_name(pr.name)) fail(pr.line, "invalid rule name '" + pr.name + "'");
    const std::string& a = pr.action;
    Rule r;
    try {
      if (a == "nop") {
        r = make_nop(pr.name, src, dst);
      } else if (a.size() >= 2 && (a[0] == 'r' || a[0] == 'l') &&
                 (a[1] == '!' || a[1] == '?' || a[1] == '=')) {
        const Channel c = a[0] == 'r' ? Channel::R : Channel::L;
        const std::string rest = trim(a.substr(2));
        if (a[1] == '=') {
          r = make_test(pr.name, src, c, parse_regex(rest, s.alphabet), dst);
        } else {
          if (!s.alphabet.contains(rest)) fail(pr.line, "unknown message '" + rest + "'");
          const Symbol x = s.alphabet.at(rest);
          r = a[1] == '!' ? make_write(pr.name, src, c, x, dst) : make_read(pr.name, src, c, x, dst);
        }
      } else {
        fail(pr.line, "unknown action '" + a + "'");
      }
    } catch (const InputError& e) {
      if (std::string(e.what()).rfind("line ", 0) == 0) throw;
      fail(pr.line, e.what());
    }
    if (!pr.name.empty()) {
      for (auto* rs : {&s.sender_rules, &s.receiver_rules})
        for (auto& o : *rs)
          if (o.name == pr.name) fail(pr.line, "duplicate rule name '" + pr.name + "'");
    }
    s.add_rule(pr.agent, std::move(r));
  }

  ReachInstance& inst = f.instance;
  if (!instance_line) throw InputError("missing 'instance:' line");
  auto names = split_ws(instance_line->value);
  if (names.size() != 4) fail(*instance_line, "expected 'instance: p_in q_in p_fi q_fi'");
  auto sender = [&](const std::string& n) {
    auto id = s.find_sender_state(n);
    if (!id) fail(*instance_line, "unknown sender state '" + n + "'");
    return *id;
  };
  auto receiver = [&](const std::string& n) {
    auto id = s.find_receiver_state(n);
    if (!id) fail(*instance_line, "unknown receiver state '" + n + "'");
    return *id;
  };
  inst.p_in = sender(names[0]);
  inst.q_in = receiver(names[1]);
  inst.p_fi = sender(names[2]);
  inst.q_fi = receiver(names[3]);
  auto lang = [&](const char* key) {
    auto it = langs.find(key);
    if (it == langs.end()) return Nfa::epsilon(s.alphabet);
    try {
      return parse_regex(it->second.value, s.alphabet);
    } catch (const InputError& e) {
      fail(it->second, e.what());
    }
  };
  inst.U = lang("U");
  inst.V = lang("V");
  inst.Up = lang("Up");
  inst.Vp = lang("Vp");
  inst.check();
  return f;
}

std::string format_ucst(const ReachInstance& inst, Mode mode, bool generated, const std::string& comment) {
  const Ucst& s = inst.system;
  std::ostringstream os;
  if (!comment.empty()) {
    std::istringstream in(comment);
    for (std::string line; std::getline(in, line);) os << "# " << line << "\n";
  }
  if (generated) os << "generated: yes\n";
  os << "alphabet:";
  for (auto& n : s.alphabet.names()) os << " " << n;
  os << "\nsender:";
  for (auto& n : s.sender_states) os << " " << n;
  os << "\nreceiver:";
  for (auto& n : s.receiver_states) os << " " << n;
  os << "\n";
  for (Agent a : {Agent::Sender, Agent::Receiver})
    for (auto& r : s.rules(a)) {
      os << "rule " << to_string(a) << " " << r.name << ": " << s.states(a)[r.source] << " -> "
         << s.states(a)[r.target] << " : ";
      if (r.is_nop()) os << "nop";
      else if (r.is_write()) os << to_string(r.channel) << "!" << s.alphabet.name(r.msg());
      else if (r.is_read()) os << to_string(r.channel) << "?" << s.alphabet.name(r.msg());
      else os << to_string(r.channel) << "=" << test_regex(r);
      os << "\n";
    }
  os << "instance: " << s.sender_states[inst.p_in] << " " << s.receiver_states[inst.q_in] << " "
     << s.sender_states[inst.p_fi] << " " << s.receiver_states[inst.q_fi] << "\n";
  os << "U: " << lang_regex(inst.U) << "\nV: " << lang_regex(inst.V) << "\nUp: " << lang_regex(inst.Up)
     << "\nVp: " << lang_regex(inst.Vp) << "\n";
  if (mode != Mode::Lossy) os << "mode: " << to_string(mode) << "\n";
  return os.str();
}

PepInstance parse_pep(std::string_view text) {
  PepInstance p;
  std::vector<Line> maps;
  std::optional<Line> r, rp;
  bool have_sigma = false, have_gamma = false;
  for (const Line& l : key_lines(text)) {
    if (l.key == "sigma" || l.key == "gamma") {
      Alphabet& a = l.key == "sigma" ? p.sigma : p.gamma;
      (l.key == "sigma" ? have_sigma : have_gamma) = true;
      for (auto& n : split_ws(l.value)) {
        if (!valid_symbol_name(n)) fail(l, "invalid symbol name '" + n + "'");
        if (a.contains(n)) fail(l, "duplicate symbol '" + n + "'");
        a.add(n);
      }
    } else if (l.key == "u" || l.key == "v") {
      maps.push_back(l);
    } else if (l.key == "R") {
      r = l;
    } else if (l.key == "Rp") {
      rp = l;
    } else {
      fail(l, "unknown key '" + l.key + "'");
    }
  }
  if (!have_sigma || !have_gamma) throw InputError("missing 'sigma:' or 'gamma:' line");
  p.u_map.assign(p.sigma.size(), {});
  p.v_map.assign(p.sigma.size(), {});
  for (auto& l : maps) {
    auto arrow = l.value.find("->");
    if (arrow == std::string::npos) fail(l, "expected 'LETTER -> WORD'");
    const std::string letter = trim(l.value.substr(0, arrow));
    if (!p.sigma.contains(letter)) fail(l, "unknown letter '" + letter + "'");
    try {
      (l.key == "u" ? p.u_map : p.v_map)[p.sigma.at(letter)] = p.gamma.parse_word(l.value.substr(arrow + 2));
    } catch (const InputError& e) {
      fail(l, e.what());
    }
  }
  auto lang = [&](const std::optional<Line>& l, bool empty_default) {
    if (!l) return empty_default ? Nfa::empty(p.sigma) : Nfa::universal(p.sigma);
    try {
      return parse_regex(l->value, p.sigma);
    } catch (const InputError& e) {
      fail(*l, e.what());
    }
  };
  if (!r) throw InputError("missing 'R:' line");
  p.R = lang(r, false);
  p.Rp = lang(rp, true);
  p.check();
  return p;
}

std::string format_pep(const PepInstance& p, const std::string& comment) {
  std::ostringstream os;
  if (!comment.empty()) {
    std::istringstream in(comment);
    for (std::string line; std::getline(in, line);) os << "# " << line << "\n";
  }
  os << "sigma:";
  for (auto& n : p.sigma.names()) os << " " << n;
  os << "\ngamma:";
  for (auto& n : p.gamma.names()) os << " " << n;
  os << "\n";
  auto word = [&](const Word& w) {
    std::string out;
    for (Symbol x : w) out += (out.empty() ? "" : " ") + p.gamma.name(x);
    return out.empty() ? std::string("EPS") : out;
  };
  for (Symbol a = 0; a < static_cast<Symbol>(p.sigma.size()); ++a)
    os << "u: " << p.sigma.name(a) << " -> " << word(p.u_map[a]) << "\n";
  for (Symbol a = 0; a < static_cast<Symbol>(p.sigma.size()); ++a)
    os << "v: " << p.sigma.name(a) << " -> " << word(p.v_map[a]) << "\n";
  os << "R: " << to_regex(p.R) << "\nRp: " << to_regex(p.Rp) << "\n";
  return os.str();
}

namespace {

bool same_rule(const Rule& a, const Rule& b) {
  if (a.name != b.name || a.source != b.source || a.target != b.target) return false;
  if (a.action.index() != b.action.index()) return false;
  if (a.is_nop()) return true;
  if (a.channel != b.channel) return false;
  if (a.is_test()) return language_equal(a.test_lang(), b.test_lang()).equal;
  return a.msg() == b.msg();
}

}  // namespace

bool structurally_equal(const ReachInstance& a, const ReachInstance& b) {
  const Ucst &x = a.system, &y = b.system;
  if (x.alphabet != y.alphabet || x.sender_states != y.sender_states ||
      x.receiver_states != y.receiver_states || x.sender_rules.size() != y.sender_rules.size() ||
      x.receiver_rules.size() != y.receiver_rules.size())
    return false;
  for (std::size_t i = 0; i < x.sender_rules.size(); ++i)
    if (!same_rule(x.sender_rules[i], y.sender_rules[i])) return false;
  for (std::size_t i = 0; i < x.receiver_rules.size(); ++i)
    if (!same_rule(x.receiver_rules[i], y.receiver_rules[i])) return false;
  return a.p_in == b.p_in && a.q_in == b.q_in && a.p_fi == b.p_fi && a.q_fi == b.q_fi &&
         language_equal(a.U, b.U).equal && language_equal(a.V, b.V).equal &&
         language_equal(a.Up, b.Up).equal && language_equal(a.Vp, b.Vp).equal;
}

bool structurally_equal(const PepInstance& a, const PepInstance& b) {
  return a.sigma == b.sigma && a.gamma == b.gamma && a.u_map == b.u_map && a.v_map == b.v_map &&
         language_equal(a.R, b.R).equal && language_equal(a.Rp, b.Rp).equal;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

}  // namespace ucst
