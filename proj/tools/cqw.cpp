#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "cqw/engine.hpp"
#include "cqw/io.hpp"
#include "cqw/shannon.hpp"
#include "cqw/width.hpp"

using namespace cqw;

namespace {

enum Exit { Ok = 0, False = 1, Usage = 2, Budget = 3, Defect = 4 };

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

Rat parse_rat(const std::string& s, const char* what) {
    try {
        return Rat::parse(s);
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ") + what + ": " + s);
    }
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

WidthMode parse_mode(const std::string& m) {
    if (m == "auto") return WidthMode::Auto;
    if (m == "exhaustive") return WidthMode::Exhaustive;
    if (m == "pruned") return WidthMode::Pruned;
    throw UsageError("unknown mode " + m);
}

// Roughly `size` tuples spread over the atoms, uniform over a square-root domain.
Database random_instance(const Query& Q, std::size_t size, std::mt19937_64& rng) {
    Database db;
    const std::size_t per = std::max<std::size_t>(1, size / Q.atoms.size());
    for (const auto& a : Q.atoms) {
        int domain = std::max(2, static_cast<int>(std::lround(std::pow(static_cast<double>(per), 1.0 / static_cast<double>(a.vars.size())) * 2)));
        std::uniform_int_distribution<int> d(0, domain - 1);
        std::vector<Tuple> rows;
        for (std::size_t i = 0; i < per; ++i) {
            Tuple t;
            for (std::size_t c = 0; c < a.vars.size(); ++c) t.push_back(d(rng));
            rows.push_back(std::move(t));
        }
        db.add(Relation(a.name, a.vars, std::move(rows)));
    }
    return db;
}

bool is_plain_triangle(const Query& Q) {
    if (Q.atoms.size() != 3) return false;
    std::map<std::string, std::vector<std::string>> m;
    for (const auto& a : Q.atoms) m[a.name] = a.vars;
    return m["R"] == std::vector<std::string>{"X", "Y"} && m["S"] == std::vector<std::string>{"Y", "Z"} &&
           m["T"] == std::vector<std::string>{"X", "Z"};
}

int run(int argc, char** argv) {
    CLI::App app{"Exact (omega-)submodular width and query evaluation for Boolean conjunctive queries"};
    app.require_subcommand(1);

    std::string query, data, omega_s = "3", mode_s = "auto", json_out, grid_s = "1/20", sizes_s = "100,1000,10000";
    bool classic = false, oracle_check = false, timing = false;
    int lp_index = -1, k = 4;
    unsigned long long seed = 1;

    auto* width = app.add_subcommand("width", "print the width as an exact rational");
    width->add_option("--query", query, "query file")->required();
    width->add_option("--omega", omega_s, "matrix multiplication exponent p/q");
    width->add_flag("--classic", classic, "submodular width instead");
    width->add_option("--mode", mode_s, "exhaustive, pruned or auto");
    width->add_option("--json", json_out, "write a JSON report");

    auto* solve = app.add_subcommand("solve", "evaluate the query on a database");
    solve->add_option("--query", query, "query file")->required();
    solve->add_option("--data", data, "directory of <Atom>.tsv files")->required();
    solve->add_option("--omega", omega_s, "matrix multiplication exponent p/q");
    solve->add_flag("--oracle-check", oracle_check, "also run the nested-loop oracle");

    auto* oracle = app.add_subcommand("oracle", "nested-loop answer");
    oracle->add_option("--query", query, "query file")->required();
    oracle->add_option("--data", data, "directory of <Atom>.tsv files")->required();

    auto* prove = app.add_subcommand("prove", "print an integral certificate and its proof sequence");
    prove->add_option("--query", query, "query file")->required();
    prove->add_option("--omega", omega_s, "matrix multiplication exponent p/q");
    prove->add_option("--lp", lp_index, "LP index (default: the one attaining the width)");

    auto* cyc = app.add_subcommand("cycle-exp", "cycle exponent from square matrix multiplication");
    cyc->add_option("--k", k, "cycle length")->required();
    cyc->add_option("--omega", omega_s, "matrix multiplication exponent p/q");
    cyc->add_option("--grid", grid_s, "grid step 1/S");

    auto* bench = app.add_subcommand("bench", "work counters on random instances");
    bench->add_option("--query", query, "query file")->required();
    bench->add_option("--omega", omega_s, "matrix multiplication exponent p/q");
    bench->add_option("--sizes", sizes_s, "comma-separated target sizes");
    bench->add_option("--seed", seed, "random seed");
    bench->add_flag("--timing", timing, "add wall-clock column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Ok : Usage;
    }

    const Rat omega = parse_rat(omega_s, "omega");
    if (omega < Rat(2) || omega > Rat(3)) throw UsageError("omega must lie in [2, 3]");

    if (*width) {
        Query Q = parse_query(query);
        Hypergraph H = Q.hypergraph();
        WidthOptions opt;
        opt.mode = parse_mode(mode_s);
        auto t0 = std::chrono::steady_clock::now();
        WidthReport r = classic ? subw(H, opt) : osubw(H, omega, opt);
        double ms = ms_since(t0);
        std::cout << r.width.str() << "\n";
        if (!json_out.empty()) {
            std::ofstream out(json_out);
            if (!out) throw UsageError("cannot write " + json_out);
            out << width_json(Q, H, omega, r, ms).dump(2) << "\n";
        }
        return Ok;
    }
    if (*solve || *oracle) {
        Query Q = parse_query(query);
        Database db = load_database(data, Q);
        bool ans = *oracle ? brute_force(Q, db) : evaluate(Q, db, omega);
        std::cout << (ans ? "true" : "false") << "\n";
        if (*solve && oracle_check) {
            bool ref = brute_force(Q, db);
            if (ref != ans) {
                std::cerr << "oracle disagrees: brute force says " << (ref ? "true" : "false") << "\n";
                return Defect;
            }
        }
        return ans ? Ok : False;
    }
    if (*prove) {
        Query Q = parse_query(query);
        Hypergraph H = Q.hypergraph();
        WidthOptions opt;
        opt.mode = WidthMode::Exhaustive;
        opt.keep_leaves = true;
        WidthReport r = osubw(H, omega, opt);
        int idx = lp_index >= 0 ? lp_index : r.argmax_lp;
        if (idx < 0 || idx >= static_cast<int>(r.leaves.size()))
            throw UsageError("LP index out of range (0.." + std::to_string(r.leaves.size() - 1) + ")");
        const auto& leaf = r.leaves[idx];
        auto cert = normalize_well_behaved(integralize(from_dual(leaf.lp, leaf.sol)));
        std::cout << "lp " << idx << " of " << r.leaves.size() << ", value " << leaf.sol.value.str() << "\n";
        std::cout << cert.str(H) << "\n";
        std::cout << render_sequence(H, build_proof_sequence(cert));
        return Ok;
    }
    if (*cyc) {
        Rat grid = parse_rat(grid_s, "grid");
        Rat v = square_cycle_exponent(k, omega, grid);
        std::cout << v.str() << "\n";
        std::cout << "band [" << (v - grid).str() << ", " << (v + grid).str() << "]\n";
        return Ok;
    }
    if (*bench) {
        Query Q = parse_query(query);
        std::vector<std::size_t> sizes;
        std::stringstream ss(sizes_s);
        for (std::string tok; std::getline(ss, tok, ',');) {
            try {
                sizes.push_back(std::stoul(tok));
            } catch (const std::exception&) {
                throw UsageError("invalid size " + tok);
            }
        }
        std::mt19937_64 rng(seed);
        const bool tri = is_plain_triangle(Q);
        std::cout << "N\tanswer\tpanda_branches\tmax_table\torders" << (tri ? "\ttriangle_work" : "") << (timing ? "\twall_ms" : "") << "\n";
        for (std::size_t n : sizes) {
            Database db = random_instance(Q, n, rng);
            EvalStats st;
            auto t0 = std::chrono::steady_clock::now();
            bool ans = evaluate(Q, db, omega, &st);
            double ms = ms_since(t0);
            std::cout << db.N << "\t" << (ans ? "true" : "false") << "\t" << st.panda_branches << "\t" << st.max_panda_table << "\t"
                      << st.orders_tried;
            if (tri) {
                TriangleLedger L;
                evaluate_triangle(db, omega, &L);
                std::cout << "\t" << static_cast<long long>(L.total());
            }
            if (timing) std::cout << "\t" << ms;
            std::cout << "\n";
        }
        return Ok;
    }
    return Usage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return Budget;
    } catch (const DefectError& e) {
        std::cerr << "internal defect: " << e.what() << "\n";
        return Defect;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Usage;
    } catch (const std::exception& e) {
        std::cerr << "internal defect: " << e.what() << "\n";
        return Defect;
    }
}
