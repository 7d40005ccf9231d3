// Python bindings over the text formats: instances go in and out as .ucst / .pep text.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ucst/explore.hpp"
#include "ucst/generators.hpp"
#include "ucst/pep.hpp"
#include "ucst/reductions.hpp"
#include "ucst/textio.hpp"
#include "ucst/validation.hpp"

namespace py = pybind11;
using namespace ucst;

namespace {

Mode mode_of(const std::string& m) {
  if (m == "lossy") return Mode::Lossy;
  if (m == "reliable") return Mode::Reliable;
  if (m == "write-lossy") return Mode::WriteLossy;
  throw InputError("unknown mode '" + m + "'");
}

py::dict reach(const std::string& text, std::size_t bound, std::size_t steps, std::size_t max_states,
               std::optional<std::string> mode) {
  UcstFile f = parse_ucst(text);
  const Mode m = mode ? mode_of(*mode) : f.mode;
  Verdict v = bounded_reach(f.instance, Bound{bound, steps, max_states}, m);
  py::dict out;
  out["verdict"] = to_string(v.kind);
  out["explored"] = v.explored;
  if (v.witness) {
    const Ucst& s = f.instance.system;
    std::vector<std::string> labels, configs{format_configuration(s, v.witness->start)};
    for (auto& st : v.witness->steps) {
      labels.push_back(format_label(s, st.label));
      configs.push_back(format_configuration(s, st.result));
    }
    out["labels"] = labels;
    out["configurations"] = configs;
  } else {
    out["labels"] = py::none();
    out["configurations"] = py::none();
  }
  return out;
}

py::dict reduce(const std::string& text, const std::string& to) {
  auto target = parse_pipeline_target(to);
  if (!target) throw InputError("unknown target '" + to + "'");
  PipelineTrace tr = run_pipeline(parse_ucst(text).instance, *target);
  py::dict out;
  out["report"] = tr.report();
  if (tr.pep) {
    out["format"] = "pep";
    out["text"] = format_pep(*tr.pep);
  } else {
    out["format"] = "ucst";
    out["text"] = format_ucst(tr.final_instance(), Mode::Lossy, !tr.stages.empty());
  }
  return out;
}

Word letters(const PepInstance& p, const std::vector<std::string>& names) {
  Word w;
  for (auto& n : names) w.push_back(p.sigma.at(n));
  return w;
}

std::vector<std::string> names_of(const PepInstance& p, const Word& w) {
  std::vector<std::string> out;
  for (Symbol x : w) out.push_back(p.sigma.name(x));
  return out;
}

std::vector<py::dict> validate(std::uint64_t seed, std::size_t samples, std::size_t bound, bool mutant) {
  ValidateOptions o{seed, samples, bound, mutant};
  std::vector<py::dict> out;
  for (auto& r : run_validation(o)) {
    py::dict d;
    d["name"] = r.name;
    d["ok"] = r.ok();
    d["cases"] = r.cases;
    d["passed"] = r.passed;
    d["failed"] = r.failed;
    d["inconclusive"] = r.inconclusive;
    d["failures"] = r.failures;
    d["note"] = r.note;
    out.push_back(d);
  }
  return out;
}

std::string gen(const std::string& kind, const std::string& ops, const std::string& alphabet,
                const std::string& rules) {
  std::vector<std::string> names;
  std::istringstream is(alphabet);
  for (std::string n; is >> n;) names.push_back(n);
  const Alphabet m(names);
  UcstFile f;
  if (kind == "thue") {
    f = gen_thue_recurrent(SemiThueSystem::parse(m, rules)).as_file();
  } else {
    QueueAutomaton qa = QueueAutomaton::program(m, ops);
    if (kind == "queue-parity")
      f = gen_queue_parity(qa);
    else if (kind == "queue-head")
      f = gen_queue_head(qa);
    else if (kind == "writelossy")
      f = gen_writelossy_queue(qa);
    else
      throw InputError("unknown generator '" + kind + "'");
  }
  return format_ucst(f.instance, f.mode, f.generated);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unidirectional channel systems with tests: bounded exploration, reductions, PEP bridge";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  m.def("reach", &reach, py::arg("text"), py::arg("bound") = 4, py::arg("steps") = 0,
        py::arg("max_states") = 0, py::arg("mode") = py::none(),
        "Bounded reachability on a .ucst instance; returns verdict, explored and the witness run.");
  m.def("reduce", &reduce, py::arg("text"), py::arg("to"),
        "Run the reduction pipeline up to z1n1, eg, egz1, eez1, eez1l or pep.");
  m.def("format", [](const std::string& text) {
    UcstFile f = parse_ucst(text);
    return format_ucst(f.instance, f.mode, f.generated);
  }, py::arg("text"), "Parse and re-emit a .ucst instance in canonical form.");
  m.def("to_pep", [](const std::string& text) { return format_pep(ucst_to_pep(parse_ucst(text).instance)); },
        py::arg("text"), "PEP instance of an E-E UCST[Z1^l] instance.");
  m.def("from_pep", [](const std::string& text) { return format_ucst(pep_to_ucst(parse_pep(text)), Mode::Lossy, true); },
        py::arg("text"), "E-E UCST[Z1^l] instance of a PEP instance.");
  m.def("is_solution", [](const std::string& pep, const std::vector<std::string>& word) {
    PepInstance p = parse_pep(pep);
    return is_solution(p, letters(p, word));
  }, py::arg("pep"), py::arg("word"));
  m.def("bounded_solve", [](const std::string& pep, std::size_t max_len) -> std::optional<std::vector<std::string>> {
    PepInstance p = parse_pep(pep);
    auto w = bounded_solve(p, max_len);
    if (!w) return std::nullopt;
    return names_of(p, *w);
  }, py::arg("pep"), py::arg("max_len"), "Shortest, then least, solution of length <= max_len.");
  m.def("validate", &validate, py::arg("seed") = 1, py::arg("samples") = 100, py::arg("bound") = 4,
        py::arg("mutant") = false, "Run the randomized cross-checks.");
  m.def("gen", &gen, py::arg("kind"), py::arg("ops") = "!a ?a", py::arg("alphabet") = "a b",
        py::arg("rules") = "ab->ba, ba->ab", "Generate queue-parity, queue-head, writelossy or thue instances.");
}
