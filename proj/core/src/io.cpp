#include "cbp/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cbp::io {

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    return in;
}

} // namespace

Graph read_dimacs(std::istream& in) {
    Graph g;
    bool have_header = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "c") continue;
        if (tag == "p") {
            std::string fmt;
            int n = 0, m = 0;
            if (!(ls >> fmt >> n >> m) || (fmt != "edge" && fmt != "col") || n < 1)
                throw ParseError("dimacs: bad problem line at line " +
                                 std::to_string(lineno));
            g = Graph::empty(n);
            have_header = true;
        } else if (tag == "e") {
            if (!have_header)
                throw ParseError("dimacs: edge before problem line at line " +
                                 std::to_string(lineno));
            int i = 0, j = 0;
            if (!(ls >> i >> j) || i < 1 || j < 1 || i > g.n || j > g.n || i == j)
                throw ParseError("dimacs: bad edge at line " + std::to_string(lineno));
            g.add_edge(i - 1, j - 1);
        } else {
            throw ParseError("dimacs: unknown line tag '" + tag + "' at line " +
                             std::to_string(lineno));
        }
    }
    if (!have_header) throw ParseError("dimacs: missing problem line");
    return g;
}

Graph read_dimacs_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_dimacs(in);
}

void write_dimacs(const Graph& g, std::ostream& out) {
    out << "p edge " << g.n << " " << g.num_edges() << "\n";
    for (auto [i, j] : g.edges) out << "e " << (i + 1) << " " << (j + 1) << "\n";
}

std::vector<PartitionInstance> read_partition_instances(std::istream& in) {
    std::vector<PartitionInstance> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first[0] == '#') continue;
        ls.clear();
        ls.seekg(0);
        PartitionInstance inst;
        long long v;
        while (ls >> v) {
            if (v < 1)
                throw ParseError("partition: entries must be positive (line " +
                                 std::to_string(lineno) + ")");
            inst.a.push_back(v);
        }
        if (!ls.eof())
            throw ParseError("partition: non-integer token at line " +
                             std::to_string(lineno));
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<PartitionInstance> read_partition_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_partition_instances(in);
}

void write_partition_instances(const std::vector<PartitionInstance>& v, std::ostream& out) {
    for (const auto& inst : v) {
        for (size_t i = 0; i < inst.a.size(); ++i)
            out << (i ? " " : "") << inst.a[i];
        out << "\n";
    }
}

int SdpaData::total_order() const {
    int n = 0;
    for (int s : block_sizes) n += s < 0 ? -s : s;
    return n;
}

SymMat SdpaData::matrix(int matno) const {
    const int n = total_order();
    SymMat m(n);
    for (const auto& e : entries) {
        if (e.matno != matno) continue;
        int off = 0;
        for (int bl = 0; bl + 1 < e.block; ++bl)
            off += block_sizes[bl] < 0 ? -block_sizes[bl] : block_sizes[bl];
        m.set(off + e.i - 1, off + e.j - 1, e.value);
    }
    return m;
}

SdpaData read_sdpa(std::istream& in) {
    SdpaData data;
    std::string line;
    int stage = 0;  // 0: m, 1: nblocks, 2: sizes, 3: c, 4: entries
    int nblocks = 0;
    while (std::getline(in, line)) {
        // comment lines start with " or *
        size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '"' || line[first] == '*') continue;
        // braces and commas are allowed separators in the header lines
        for (char& ch : line)
            if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
        std::istringstream ls(line);
        if (stage == 0) {
            if (!(ls >> data.num_constraints) || data.num_constraints < 0)
                throw ParseError("sdpa: bad constraint count");
            stage = 1;
        } else if (stage == 1) {
            if (!(ls >> nblocks) || nblocks < 1) throw ParseError("sdpa: bad block count");
            stage = 2;
        } else if (stage == 2) {
            int s;
            while (ls >> s) data.block_sizes.push_back(s);
            if (static_cast<int>(data.block_sizes.size()) < nblocks)
                throw ParseError("sdpa: expected " + std::to_string(nblocks) +
                                 " block sizes");
            data.block_sizes.resize(nblocks);
            stage = 3;
        } else if (stage == 3) {
            double v;
            while (ls >> v) data.c.push_back(v);
            if (static_cast<int>(data.c.size()) < data.num_constraints)
                throw ParseError("sdpa: expected " + std::to_string(data.num_constraints) +
                                 " objective entries");
            data.c.resize(data.num_constraints);
            stage = 4;
        } else {
            SdpaData::Entry e;
            if (!(ls >> e.matno >> e.block >> e.i >> e.j >> e.value))
                throw ParseError("sdpa: bad entry line: " + line);
            if (e.matno < 0 || e.matno > data.num_constraints)
                throw ParseError("sdpa: matrix number out of range");
            if (e.block < 1 || e.block > nblocks)
                throw ParseError("sdpa: block number out of range");
            const int bs = data.block_sizes[e.block - 1];
            const int limit = bs < 0 ? -bs : bs;
            if (e.i < 1 || e.j < 1 || e.i > limit || e.j > limit)
                throw ParseError("sdpa: entry index out of range");
            if (bs < 0 && e.i != e.j)
                throw ParseError("sdpa: off-diagonal entry in a diagonal block");
            data.entries.push_back(e);
        }
    }
    if (stage < 4) throw ParseError("sdpa: truncated file");
    return data;
}

SdpaData read_sdpa_file(const std::string& path) {
    auto in = open_or_throw(path);
    return read_sdpa(in);
}

void write_sdpa(const SdpaData& data, std::ostream& out) {
    out << data.num_constraints << "\n";
    out << data.block_sizes.size() << "\n";
    for (size_t i = 0; i < data.block_sizes.size(); ++i)
        out << (i ? " " : "") << data.block_sizes[i];
    out << "\n";
    for (int i = 0; i < data.num_constraints; ++i)
        out << (i ? " " : "") << format_double(data.c[i]);
    out << "\n";
    for (const auto& e : data.entries)
        out << e.matno << " " << e.block << " " << e.i << " " << e.j << " "
            << format_double(e.value) << "\n";
}

SdpData sdpa_to_sdp(const SdpaData& data) {
    SdpData sdp;
    sdp.c = data.matrix(0);
    for (int k = 1; k <= data.num_constraints; ++k)
        sdp.constraints.emplace_back(data.matrix(k), data.c[k - 1]);
    return sdp;
}

PencilSdp sdpa_to_pencil(const SdpaData& data) {
    if (data.num_constraints != 2)
        throw ParseError("sdpa pencil: exactly two constraint matrices expected");
    std::vector<SymMat> fi{data.matrix(1), data.matrix(2)};
    return pencil_sdp(data.matrix(0), fi, data.c);
}

SdpaData sdpa_from_pencil(const SymMat& f0, const std::vector<SymMat>& fi,
                          const std::vector<double>& d) {
    SdpaData data;
    data.num_constraints = static_cast<int>(fi.size());
    data.block_sizes = {f0.order()};
    data.c = d;
    auto push = [&](int matno, const SymMat& m) {
        for (int i = 0; i < m.order(); ++i)
            for (int j = i; j < m.order(); ++j)
                if (m(i, j) != 0.0)
                    data.entries.push_back({matno, 1, i + 1, j + 1, m(i, j)});
    };
    push(0, f0);
    for (size_t k = 0; k < fi.size(); ++k) push(static_cast<int>(k) + 1, fi[k]);
    return data;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string trace_to_json(const IterationTrace& trace, const std::string& command,
                          const std::string& method) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["command"] = command;
    j["method"] = method;
    j["status"] = to_string(trace.status);
    if (trace.infeasible_at >= 0) j["infeasible_at"] = trace.infeasible_at;
    j["refuted"] = trace.refuted;
    if (trace.refuted) j["refuted_at"] = trace.refuted_at;
    auto records = nlohmann::ordered_json::array();
    for (const auto& rec : trace.records) {
        nlohmann::ordered_json r;
        r["k"] = rec.k;
        r["value"] = rec.value;
        r["dual_value"] = rec.dual_value;
        r["basis"] = to_string(rec.basis_source);
        r["delta_reg"] = rec.chol_shift;
        r["solver_iters"] = rec.solver_iterations;
        r["gap"] = rec.gap;
        r["solve_status"] = to_string(rec.solve_status);
        records.push_back(std::move(r));
    }
    j["records"] = std::move(records);
    return j.dump(2) + "\n";
}

std::string trace_to_csv(const IterationTrace& trace) {
    std::string out = "k,value,delta_reg,solver_iters,gap\n";
    for (const auto& rec : trace.records) {
        out += std::to_string(rec.k);
        out += ',';
        out += format_double(rec.value);
        out += ',';
        out += format_double(rec.chol_shift);
        out += ',';
        out += std::to_string(rec.solver_iterations);
        out += ',';
        out += format_double(rec.gap);
        out += '\n';
    }
    return out;
}

} // namespace cbp::io
