#pragma once

#include <string>
#include <string_view>

#include "ucst/pep.hpp"
#include "ucst/system.hpp"

namespace ucst {

/// Parsed `.ucst` file: an instance plus the semantics it is meant for.
struct UcstFile {
  ReachInstance instance;
  Mode mode = Mode::Lossy;
  bool generated = false;  // reserved symbols z, n, # allowed
};

/// Line format:
///   alphabet: a b c
///   sender: p0 p1        receiver: q0 q1
///   rule s [NAME]: p0 -> p1 : l!a | r?b | l=REGEX | nop
///   instance: p_in q_in p_fi q_fi
///   U: REGEX   V: REGEX   Up: REGEX   Vp: REGEX   (default EPS)
///   mode: lossy | reliable | write-lossy
///   generated: yes
/// Lines starting with '#' are comments.
UcstFile parse_ucst(std::string_view text);
std::string format_ucst(const ReachInstance& inst, Mode mode = Mode::Lossy, bool generated = false,
                        const std::string& comment = "");

/// Line format: sigma, gamma, `u: a -> WORD`, `v: a -> WORD`, `R: REGEX`, `Rp: REGEX`.
PepInstance parse_pep(std::string_view text);
std::string format_pep(const PepInstance& inst, const std::string& comment = "");

/// Same names, rules and initial/final data (languages compared by equality).
bool structurally_equal(const ReachInstance& a, const ReachInstance& b);
bool structurally_equal(const PepInstance& a, const PepInstance& b);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace ucst
