#pragma once

#include <iosfwd>
#include <string>

#include "cbp/partition.hpp"
#include "cbp/stableset.hpp"

namespace cbp::io {

/// DIMACS edge format: "p edge <n> <m>" then "e <i> <j>" lines,
/// 1-based nodes, "c" comment lines.
Graph read_dimacs(std::istream& in);
Graph read_dimacs_file(const std::string& path);
void write_dimacs(const Graph& g, std::ostream& out);

/// One instance per line, whitespace-separated positive integers;
/// blank lines and lines starting with '#' are skipped.
std::vector<PartitionInstance> read_partition_instances(std::istream& in);
std::vector<PartitionInstance> read_partition_file(const std::string& path);
void write_partition_instances(const std::vector<PartitionInstance>& v, std::ostream& out);

/// SDPA sparse ".dat-s" data: m constraint matrices F_1..F_m over a
/// block-diagonal symmetric structure, an objective vector c, and the
/// cost matrix F_0.  Negative block sizes denote diagonal blocks.
struct SdpaData {
    int num_constraints = 0;
    std::vector<int> block_sizes;
    std::vector<double> c;
    struct Entry {
        int matno;  // 0 = F0
        int block;  // 1-based
        int i, j;   // 1-based within the block
        double value;
    };
    std::vector<Entry> entries;

    int total_order() const;
    /// F_k assembled as one symmetric matrix over all blocks.
    SymMat matrix(int matno) const;
};

SdpaData read_sdpa(std::istream& in);
SdpaData read_sdpa_file(const std::string& path);
void write_sdpa(const SdpaData& data, std::ostream& out);

/// Reads the data as the equality-form SDP
///   minimize F0 . X  s.t.  F_k . X = c_k,  X psd
/// over the single block-embedded symmetric matrix.
SdpData sdpa_to_sdp(const SdpaData& data);

/// Interprets the data as the pencil F0 + sum_k z_k F_k psd with
/// objective direction c (requires exactly two constraint matrices
/// for the two-parameter sweeps).
PencilSdp sdpa_to_pencil(const SdpaData& data);

SdpaData sdpa_from_pencil(const SymMat& f0, const std::vector<SymMat>& fi,
                          const std::vector<double>& d);

/// Deterministic double formatting (shortest round-trip decimal).
std::string format_double(double v);

/// Trace serialization.  JSON carries a schema marker and one record
/// per iteration; CSV has the fixed column set
/// "k,value,delta_reg,solver_iters,gap".
std::string trace_to_json(const IterationTrace& trace, const std::string& command,
                          const std::string& method);
std::string trace_to_csv(const IterationTrace& trace);

} // namespace cbp::io
