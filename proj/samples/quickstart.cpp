// Simulate one S200N run, encode it, and list the five most suspicious untested agents.

#include <iostream>

#include "stemcovid/stemcovid.hpp"

int main(int argc, char** argv) {
    using namespace stemcovid;
    const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;

    const auto out = sim::run_simulation(sim::preset("S200N"), seed);
    const auto memory = build_memory(out.dataset());
    std::cout << "events " << memory.registry().size() << ", individuals " << memory.size() << ", positives "
              << out.dataset().records.size() - out.untested_count() << '\n';

    search::SearchConfig cfg;
    cfg.k = 5;
    const auto ranked = search::rank_untested(memory, search::pool_evidence(memory), cfg);
    const auto accs = out.acc_agents();
    const auto picked = search::select_candidates(ranked, cfg);
    for (std::size_t i = 0; i < picked.size(); ++i) {
        const bool acc = std::binary_search(accs.begin(), accs.end(), picked[i]);
        std::cout << ranked[i].rank << ". agent " << picked[i] << "  activation " << ranked[i].activation
                  << (acc ? "  (ACC)" : "") << '\n';
    }
}
