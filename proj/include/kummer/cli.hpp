#pragma once

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kummer/braid.hpp"
#include "kummer/cover.hpp"
#include "kummer/errors.hpp"
#include "kummer/exactlin.hpp"
#include "kummer/folding.hpp"
#include "kummer/freegroup.hpp"
#include "kummer/homology.hpp"
#include "kummer/schreier.hpp"

namespace kummer::cli {

enum ExitCode : int {
    Ok = 0,
    Validation = 1,
    Consistency = 2,
    Usage = 64,
};

struct Options {
    std::string subcommand;
    std::string params_file;
    std::optional<std::int64_t> n;
    std::vector<std::int64_t> d;
    bool json = false;
    std::string dot_file;
    std::optional<std::uint64_t> seed;
    std::int64_t window = 3;
    double tol = 1e-8;
    std::string mode;
    std::string format = "text";
    std::string words_file;
    std::string other_file;
    std::string preset;
    bool print_rank = false;
    int free_rank = 0;
    int generator = 0;
    std::vector<std::string> members;
};

namespace detail {

using nlohmann::json;

inline CurveParams load_params(const Options& o) {
    if (!o.params_file.empty()) {
        if (o.n || !o.d.empty())
            throw DomainError("give either --params or -n/-d, not both");
        std::ifstream in(o.params_file);
        if (!in)
            throw DomainError("cannot open params file '" + o.params_file + "'");
        json j;
        try {
            in >> j;
            return params_from_json(j);
        } catch (const json::exception& e) {
            throw ValidationError(ValidationKind::Malformed, std::string("params file: ") + e.what());
        }
    }
    if (!o.n || o.d.empty())
        throw DomainError("curve parameters required: --params FILE or -n N -d d1,d2,...");
    return validate(*o.n, o.d);
}

inline int word_rank(const Options& o, const std::optional<CurveParams>& p) {
    if (o.free_rank > 0)
        return o.free_rank;
    if (p)
        return p->free_rank();
    throw DomainError("word rank unknown: pass curve parameters or --free-rank K");
}

inline std::vector<Word> read_words(const std::string& path, int rank) {
    std::ifstream in(path);
    if (!in)
        throw DomainError("cannot open word file '" + path + "'");
    std::vector<Word> words;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#')
            continue;
        words.push_back(Word::parse(line, rank));
    }
    return words;
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw DomainError("cannot write '" + path + "'");
    f << text;
}

inline std::vector<KernelMode> modes(const Options& o) {
    if (o.mode.empty())
        return {KernelMode::Integral, KernelMode::ModN};
    if (o.mode == "modn")
        return {KernelMode::ModN};
    if (o.mode == "integral")
        return {KernelMode::Integral};
    throw DomainError("--mode must be modn or integral");
}

inline std::string join(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline json snf_block(std::span<const Integer> d, const Integer& n) {
    const auto snf = smith_row(d);
    const auto st = structured_smith(d, n);
    json j;
    j["gcd"] = snf.gcd.get_str();
    j["R"] = to_json(snf.r_matrix);
    j["det"] = determinant(snf.r_matrix).get_str();
    j["structured"] = {{"candidate", to_json(st.candidate)}, {"det", st.det.get_str()}, {"is_snf", st.is_snf}};
    return j;
}

inline void print_snf(std::ostream& out, const json& j) {
    out << "gcd " << j["gcd"].get<std::string>() << "\n";
    out << "R = " << matrix_from_json(j["R"]) << "\n";
    out << "det R = " << j["det"].get<std::string>() << "\n";
    out << "structured candidate = " << matrix_from_json(j["structured"]["candidate"]) << "\n";
    out << "structured det = " << j["structured"]["det"].get<std::string>()
        << (j["structured"]["is_snf"].get<bool>() ? " (unimodular)" : " (not unimodular)") << "\n";
}

inline json genus_block(const CurveParams& p) {
    json ram = json::array();
    for (const auto& b : ramification(p))
        ram.push_back({{"e", b.e}, {"points", b.g}, {"ell", b.ell}});
    return {{"genus", genus(p)}, {"branch_count", branch_count(p)}, {"open_rank", open_rank(p)}, {"ramification", ram}};
}

inline json graph_block(const StallingsGraph& g) {
    return {{"vertices", g.vertex_count()}, {"edges", g.edges().size()}, {"rank", rank(g)}};
}

inline json braid_block(const CurveParams& p, const std::vector<KernelMode>& ms, int only) {
    json arr = json::array();
    for (int i = 1; i < p.free_rank(); ++i) {
        if (only && i != only)
            continue;
        for (auto m : ms)
            arr.push_back(to_json(braid_verdict(p, i, m)));
    }
    return arr;
}

inline int cmd_validate(const Options& o, std::ostream& out) {
    const auto p = load_params(o);
    if (o.json)
        out << json{{"valid", true}, {"params", to_json(p)}}.dump(2) << "\n";
    else
        out << "valid: n=" << p.n() << " d=" << join(p.d()) << "\n";
    return Ok;
}

inline int cmd_genus(const Options& o, std::ostream& out) {
    const auto p = load_params(o);
    const auto j = genus_block(p);
    if (o.json) {
        out << j.dump(2) << "\n";
        return Ok;
    }
    out << "genus " << j["genus"] << "\nbranch_count " << j["branch_count"] << "\nopen_rank " << j["open_rank"]
        << "\n";
    int i = 1;
    for (const auto& b : j["ramification"])
        out << "b" << i++ << ": e=" << b["e"] << " points=" << b["points"] << " ell=" << b["ell"] << "\n";
    return Ok;
}

inline int cmd_snf(const Options& o, std::ostream& out) {
    std::vector<Integer> d;
    Integer n = 0;
    if (!o.params_file.empty() || o.n) {
        const auto p = load_params(o);
        d = p.open_exponents();
        n = static_cast<long>(p.n());
    } else {
        if (o.d.empty())
            throw DomainError("snf needs -d d1,d2,... or curve parameters");
        for (auto x : o.d)
            d.emplace_back(static_cast<long>(x));
    }
    const auto j = snf_block(d, n);
    if (o.json)
        out << j.dump(2) << "\n";
    else
        print_snf(out, j);
    return Ok;
}

inline int cmd_gens(const Options& o, std::ostream& out) {
    const auto p = load_params(o);
    // mod n unless asked otherwise
    const auto k = o.mode == "integral" ? kernel_generators_integral(p, o.window) : kernel_generators_mod_n(p);
    if (o.json || o.format == "json") {
        out << to_json(k).dump(2) << "\n";
        return Ok;
    }
    if (o.format != "text")
        throw DomainError("--format must be text or json");
    out << "mode " << to_string(k.mode) << "\ncount " << k.generators.size() << "\n";
    for (std::size_t i = 0; i < k.y_basis.size(); ++i)
        out << "y" << i + 1 << " = " << k.y_basis[i].str() << "\n";
    for (const auto& w : k.generators)
        out << w.str() << "\n";
    return Ok;
}

inline StallingsGraph preset_graph(const Options& o, const CurveParams& p) {
    if (o.preset == "rn")
        return rn_graph(p.n(), p.free_rank());
    const std::vector<std::int64_t> open(p.d().begin(), p.d().end() - 1);
    if (o.preset == "powers")
        return power_graph(open);
    if (o.preset == "product")
        return product_graph(rn_graph(p.n(), p.free_rank()), power_graph(open));
    throw DomainError("--preset must be rn, powers or product");
}

inline int emit_graph(const Options& o, const StallingsGraph& g, int word_rank, std::ostream& out) {
    if (!o.dot_file.empty())
        write_file(o.dot_file, export_dot(g));
    json members = json::array();
    for (const auto& m : o.members) {
        const auto w = Word::parse(m, word_rank);
        members.push_back({{"word", w.str()}, {"member", membership_graph(g, w)}});
    }
    if (o.json) {
        auto j = graph_block(g);
        j["basis"] = json::array();
        for (const auto& w : free_basis(g))
            j["basis"].push_back(w.str());
        if (!members.empty())
            j["members"] = members;
        out << j.dump(2) << "\n";
        return Ok;
    }
    out << "vertices " << g.vertex_count() << "\nedges " << g.edges().size() << "\n";
    if (o.print_rank)
        out << "rank " << rank(g) << "\n";
    for (const auto& m : members)
        out << m["word"].get<std::string>() << (m["member"].get<bool>() ? " in" : " not in") << "\n";
    if (o.dot_file.empty() && !o.print_rank && members.empty())
        out << export_dot(g);
    return Ok;
}

inline std::optional<CurveParams> maybe_params(const Options& o) {
    if (o.params_file.empty() && !o.n && o.d.empty())
        return std::nullopt;
    return load_params(o);
}

inline int cmd_fold(const Options& o, std::ostream& out) {
    const auto p = maybe_params(o);
    if (!o.preset.empty() && !o.words_file.empty())
        throw DomainError("give either --words or --preset");
    if (!o.preset.empty()) {
        if (!p)
            throw DomainError("--preset needs curve parameters");
        return emit_graph(o, preset_graph(o, *p), p->free_rank(), out);
    }
    if (o.words_file.empty())
        throw DomainError("fold needs --words FILE or --preset");
    const int r = word_rank(o, p);
    const auto words = read_words(o.words_file, r);
    const auto g = graph_from_words(r, words);
    // folding is confluent, so a shuffled merge order must land on the same graph
    if (o.seed && graph_from_words(r, words, o.seed) != g)
        throw ConsistencyError("fold: seeded merge order produced a different core graph");
    return emit_graph(o, g, r, out);
}

inline int cmd_intersect(const Options& o, std::ostream& out) {
    const auto p = maybe_params(o);
    if (o.words_file.empty() && o.other_file.empty()) {
        if (!p)
            throw DomainError("intersect needs --words A --with B, or curve parameters");
        Options q = o;
        q.preset = "product";
        return emit_graph(o, preset_graph(q, *p), p->free_rank(), out);
    }
    if (o.words_file.empty() || o.other_file.empty())
        throw DomainError("intersect needs both --words A and --with B");
    const int r = word_rank(o, p);
    const auto a = graph_from_words(r, read_words(o.words_file, r));
    const auto b = graph_from_words(r, read_words(o.other_file, r));
    return emit_graph(o, product_graph(a, b), r, out);
}

inline int cmd_homology(const Options& o, std::ostream& out) {
    const auto p = load_params(o);
    const auto h = compute_homology(p, o.tol);
    if (o.json) {
        out << to_json(h).dump(2) << "\n";
    } else {
        out << "genus " << h.genus << "\n";
        out << std::setw(4) << "nu" << std::setw(6) << "M" << std::setw(6) << "rank" << std::setw(6) << "cw" << "\n";
        for (std::int64_t nu = 0; nu < h.n; ++nu) {
            const auto k = static_cast<std::size_t>(nu);
            out << std::setw(4) << nu << std::setw(6) << h.multiplicities[k] << std::setw(6) << h.rank_route[k]
                << std::setw(6) << h.cw_table[k] << "\n";
        }
        out << "sum_M_eq_2g " << h.checks.sum_M_eq_2g << "\nhodge " << h.checks.hodge << "\nrank_agrees "
            << h.checks.rank_agrees << "\n";
    }
    return h.checks.all() ? Ok : Consistency;
}

inline int cmd_braid(const Options& o, std::ostream& out) {
    const auto p = load_params(o);
    if (o.generator && (o.generator < 1 || o.generator >= p.free_rank()))
        throw DomainError("--generator must lie in [1, " + std::to_string(p.free_rank() - 1) + "]");
    if (p.free_rank() < 2)
        throw DomainError("braid needs s >= 3");
    const auto arr = braid_block(p, modes(o), o.generator);
    if (o.json) {
        out << arr.dump(2) << "\n";
        return Ok;
    }
    for (const auto& v : arr) {
        out << "sigma_" << v["generator"] << " " << v["mode"].get<std::string>() << ": "
            << (v["lifts"].get<bool>() ? "lifts" : "does not lift") << "\n";
        out << "  R^-1 I R = " << matrix_from_json(v["conjugated"]) << "\n";
    }
    return Ok;
}

inline int cmd_report(const Options& o, std::ostream& out) {
    const auto p = load_params(o);
    json r;
    json checks;
    r["params"] = to_json(p);
    const auto gb = genus_block(p);
    for (const auto& key : {"genus", "branch_count", "open_rank"})
        r[key] = gb[key];
    r["ramification"] = gb["ramification"];

    const Integer n = static_cast<long>(p.n());
    const auto open = p.open_exponents();
    r["snf"] = snf_block(open, n);
    {
        Integer dot = 0;
        const auto row = IntMatrix::row_vector(open) * matrix_from_json(r["snf"]["R"]);
        bool ok = row(0, 0) == Integer(r["snf"]["gcd"].get<std::string>());
        for (std::size_t c = 1; c < row.cols(); ++c)
            ok = ok && row(0, c) == 0;
        checks["snf_row_reduces"] = ok;
    }

    const auto kg = kernel_generators_mod_n(p);
    const auto core = graph_from_words(p.free_rank(), kg.generators);
    bool in_kernel = true;
    for (const auto& w : kg.generators)
        in_kernel = in_kernel && alpha_mod_n(p, w) == 0;
    r["generators"] = {{"count", kg.generators.size()},
                       {"y_basis", json::array()},
                       {"core_graph", graph_block(core)}};
    for (const auto& w : kg.y_basis)
        r["generators"]["y_basis"].push_back(w.str());
    checks["generators_in_kernel"] = in_kernel;
    checks["generator_count_eq_open_rank"] = static_cast<std::int64_t>(kg.generators.size()) == open_rank(p);
    checks["core_rank_eq_open_rank"] = rank(core) == open_rank(p);
    {
        const std::vector<std::int64_t> od(p.d().begin(), p.d().end() - 1);
        const auto prod = product_graph(rn_graph(p.n(), p.free_rank()), power_graph(od));
        r["generators"]["intersection_graph"] = graph_block(prod);
        const PullbackChecker checker(p, KernelMode::ModN);
        bool pull = true;
        for (const auto& w : kg.generators) {
            const auto v = checker.check(w);
            pull = pull && v.agrees() && v.graph;
        }
        for (const auto& y : kg.y_basis)
            pull = pull && checker.check(y).agrees();
        checks["pullback_agrees"] = pull;
    }

    const auto h = compute_homology(p, o.tol);
    r["homology"] = to_json(h);
    checks["homology_m0_zero"] = h.checks.m0_zero;
    checks["homology_sum_M_eq_2g"] = h.checks.sum_M_eq_2g;
    checks["homology_hodge"] = h.checks.hodge;
    checks["homology_rank_agrees"] = h.checks.rank_agrees;
    checks["cw_sum_eq_g"] = h.checks.cw_sum_eq_g;
    checks["alexander_fox_eq_closed"] = alexander_matrix(p) == alexander_matrix_fox(p);

    bool braid_ok = true;
    json verdicts = json::array();
    try {
        for (const auto& v : braid_block(p, {KernelMode::Integral, KernelMode::ModN}, 0))
            verdicts.push_back({{"generator", v["generator"]}, {"mode", v["mode"]}, {"lifts", v["lifts"]}});
    } catch (const ConsistencyError&) {
        braid_ok = false;
    }
    r["braid"] = verdicts;
    checks["braid_literal_eq_lattice"] = braid_ok;

    bool all = true;
    for (const auto& [k, v] : checks.items())
        all = all && v.get<bool>();
    r["checks"] = checks;
    r["consistent"] = all;

    if (o.json) {
        out << r.dump(2) << "\n";
    } else {
        out << "curve y^" << p.n() << " = prod (x - b_i)^d_i, d = " << join(p.d()) << "\n";
        out << "genus " << r["genus"] << ", branch points above " << r["branch_count"] << ", open rank "
            << r["open_rank"] << "\n";
        out << "snf gcd " << r["snf"]["gcd"].get<std::string>() << ", R = " << matrix_from_json(r["snf"]["R"])
            << "\n";
        out << "kernel generators " << kg.generators.size() << ", core graph rank " << rank(core) << "\n";
        out << "M = " << join(h.multiplicities) << "\ncw = " << join(h.cw_table) << "\n";
        for (const auto& v : verdicts)
            out << "sigma_" << v["generator"] << " " << v["mode"].get<std::string>() << ": "
                << (v["lifts"].get<bool>() ? "lifts" : "does not lift") << "\n";
        for (const auto& [k, v] : checks.items())
            out << "check " << k << ": " << (v.get<bool>() ? "ok" : "FAILED") << "\n";
    }
    return all ? Ok : Consistency;
}

inline void add_curve_options(CLI::App& sub, Options& o) {
    sub.add_option("--params", o.params_file, "curve parameters as JSON {\"n\": N, \"d\": [...]}");
    sub.add_option("-n", o.n, "cover order");
    sub.add_option("-d", o.d, "exponents d_1,...,d_s")->delimiter(',');
    sub.add_flag("--json", o.json, "JSON output");
    sub.add_option("--tol", o.tol, "relative singular value threshold");
    sub.add_option("--window", o.window, "half-width of the integral kernel window");
    sub.add_option("--seed", o.seed, "seed for randomized checks");
    sub.add_option("--dot", o.dot_file, "write the graph as DOT");
}

} // namespace detail

/// Entry point; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Kummer cover toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    struct Sub {
        const char* name;
        const char* desc;
    };
    const Sub subs[] = {
        {"validate", "check curve parameters"},
        {"genus", "genus, ramification and open-cover rank"},
        {"snf", "Smith form of (d_1..d_{s-1})"},
        {"gens", "free generators of the open cover's fundamental group"},
        {"fold", "fold words into a core graph"},
        {"intersect", "intersection of two subgroups via the product graph"},
        {"homology", "character multiplicities of H_1"},
        {"braid", "braid liftability"},
        {"report", "run every module and cross-check"},
    };
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.desc);
        detail::add_curve_options(*sub, o);
        sub->callback([&o, name = std::string(s.name)] { o.subcommand = name; });
    }
    auto* gens = app.get_subcommand("gens");
    gens->add_option("--mode", o.mode)->check(CLI::IsMember({"modn", "integral"}));
    gens->add_option("--format", o.format)->check(CLI::IsMember({"text", "json"}));
    auto* braid = app.get_subcommand("braid");
    braid->add_option("--mode", o.mode)->check(CLI::IsMember({"modn", "integral"}));
    braid->add_option("--generator", o.generator, "braid generator index i");
    for (const char* name : {"fold", "intersect"}) {
        auto* sub = app.get_subcommand(name);
        sub->add_option("--words", o.words_file, "newline-delimited word file");
        sub->add_option("--free-rank", o.free_rank, "rank of the ambient free group");
        sub->add_flag("--rank", o.print_rank, "print the Euler rank");
        sub->add_option("--member", o.members, "test membership of a word");
    }
    app.get_subcommand("fold")->add_option("--preset", o.preset)->check(CLI::IsMember({"rn", "powers", "product"}));
    app.get_subcommand("intersect")->add_option("--with", o.other_file, "second word file");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Usage;
    }

    try {
        const auto& c = o.subcommand;
        if (c == "validate")
            return detail::cmd_validate(o, out);
        if (c == "genus")
            return detail::cmd_genus(o, out);
        if (c == "snf")
            return detail::cmd_snf(o, out);
        if (c == "gens")
            return detail::cmd_gens(o, out);
        if (c == "fold")
            return detail::cmd_fold(o, out);
        if (c == "intersect")
            return detail::cmd_intersect(o, out);
        if (c == "homology")
            return detail::cmd_homology(o, out);
        if (c == "braid")
            return detail::cmd_braid(o, out);
        if (c == "report")
            return detail::cmd_report(o, out);
        err << "unknown subcommand\n";
        return Usage;
    } catch (const ValidationError& e) {
        err << "ValidationError: " << e.what() << "\n";
        return Validation;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return Usage;
    } catch (const ConsistencyError& e) {
        err << "ConsistencyError: " << e.what() << "\n";
        return Consistency;
    } catch (const NumericalInstability& e) {
        err << "NumericalInstability: " << e.what() << "\n";
        return Consistency;
    }
}

} // namespace kummer::cli
