#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "couple.hpp"
#include "molecule.hpp"
#include "mst.hpp"
#include "reduction.hpp"
#include "verify.hpp"

namespace molred {

// All file formats carry {"version":1}; any other version is rejected with a
// FormatError. Files are written atomically (temp file + rename).

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string couple_to_json(const Couple& c, bool compact = false);
Couple couple_from_json(const std::string& text);

std::string molecule_to_json(const Molecule& m);
Molecule molecule_from_json(const std::string& text);

Script script_from_json(const std::string& text);
std::string script_to_json(const Script& s);

// Trace files are JSON lines: one object per step, then a summary line.
void trace_to_jsonl(const Molecule& m, const Trace& t, bool spanning, int edges,
                    std::ostream& out);
// Reads a trace saved for the given molecule (atom ids resolved against it).
struct LoadedTrace {
    Trace trace;
    bool summary_spanning = false;
    int summary_edges = 0;
};
LoadedTrace trace_from_jsonl(const Molecule& m, const std::string& text);

std::string weighted_graph_to_json(const WeightedGraph& g);
WeightedGraph weighted_graph_from_json(const std::string& text);

std::string verification_report_to_json(const VerificationReport& r);

std::map<std::string, std::string> name_map_from_json(const std::string& text);

// Deterministic DOT text: nodes by atom id ascending, edges by bond id
// ascending, forest membership as color=red, degenerate atoms style=filled.
std::string export_dot(const Molecule& m, const std::vector<int>& g_bond_ids);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace molred
