// Runs every acceptance criterion at q = 0.5 with default windows and prints one
// PASS/FAIL line per criterion. Exit code 1 if any criterion fails.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qlink/verify.hpp"

namespace {

struct Criterion {
    std::string what;
    std::vector<std::string> checks;
};

const std::vector<Criterion> kCriteria{
    {"Psi equals (b;q)_inf times 1phi1 on 200 random samples", {"verify_psi_factorization"}},
    {"both P+ displays agree for p,v,w <= 12 at q = 0.3, 0.5, 0.7", {"verify_pplus_dual"}},
    {"P+ through the normalized Wall polynomial", {"verify_wall_bridge"}},
    {"xi vectors of families +, 0, - are orthonormal", {"verify_gram"}},
    {"eigenvector residuals of the coaction of W", {"verify_eigen"}},
    {"no eigenvector at -1 for p < 0", {"verify_no_negative_eigen"}},
    {"eigenvector norm formulas against direct sums", {"verify_eta_norms"}},
    {"three summation identities on random complex cases", {"verify_sum1", "verify_sum2", "verify_sum3"}},
    {"multiplicative unitaries implement the generator comultiplication", {"verify_implementation"}},
    {"G is unitary and implements the coaction", {"verify_G_unitary", "verify_G_alpha", "verify_intertwining"}},
    {"xi^- vectors as G expansions of xi^+ vectors", {"verify_key_identities"}},
    {"corner coassociativity", {"verify_coassoc"}},
    {"Delta_{0+}(L_{0+}) against its series truncated at k_cut = 12", {"verify_L0plus_comult"}},
    {"Omega cocycle and coboundary, grouplike e", {"verify_cocycle_omega", "verify_grouplike"}},
    {"factored G blocks match the matrix elements", {"verify_factored_blocks"}},
};

}  // namespace

int main() {
    const qlink::CheckConfig cfg;
    bool all = true;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        const auto& c = kCriteria[i];
        bool ok = true;
        std::ostringstream parts;
        for (const auto& id : c.checks) {
            qlink::CheckReport r = qlink::run_check(id, cfg);
            ok = ok && r.pass;
            char buf[160];
            std::snprintf(buf, sizeof buf, "  [%s %s %.3e %s %.1e]", id.c_str(), r.pass ? "ok" : "fail", r.metric,
                          r.relation == "ge" ? ">=" : "<=", r.tolerance);
            parts << buf;
            if (!r.pass && !r.notes.empty()) parts << " " << r.notes;
        }
        all = all && ok;
        std::cout << (ok ? "PASS " : "FAIL ") << (i + 1 < 10 ? " " : "") << i + 1 << ". " << c.what << parts.str()
                  << std::endl;
    }
    return all ? 0 : 1;
}
