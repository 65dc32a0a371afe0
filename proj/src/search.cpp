#include "tpso/search.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace tpso {

namespace {

constexpr std::uint64_t kInitStream = 0x1717;
constexpr std::uint64_t kUpdateStream = 0x2a2a;

void validate(const SwarmConfig& c) {
    if (c.n_particles < 1) throw std::invalid_argument("swarm: n_particles must be >= 1");
    if (c.iterations < 1) throw std::invalid_argument("swarm: iterations must be >= 1");
    if (!(c.decode_threshold > 0.0 && c.decode_threshold < 1.0))
        throw std::invalid_argument("swarm: decode_threshold must lie in (0,1)");
    if (!(c.v_max > 0.0)) throw std::invalid_argument("swarm: v_max must be positive");
}

class MaskCache {
public:
    explicit MaskCache(const Evaluator& evaluator) : evaluator_(evaluator) {}

    double get(const Mask& mask) {
        std::string key = mask_to_string(mask);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        double fit = evaluator_(mask);
        cache_.emplace(std::move(key), fit);
        ++misses_;
        return fit;
    }

    std::size_t misses() const { return misses_; }

private:
    const Evaluator& evaluator_;
    std::unordered_map<std::string, double> cache_;
    std::size_t misses_ = 0;
};

} // namespace

Swarm init_swarm(std::size_t d, const SwarmConfig& config) {
    if (d < 1) throw std::invalid_argument("init_swarm: d must be >= 1");
    validate(config);
    Swarm swarm;
    swarm.particles.resize(config.n_particles);
    for (std::size_t i = 0; i < config.n_particles; ++i) {
        Rng rng(derive_seed(config.seed, kInitStream, i));
        Particle& p = swarm.particles[i];
        p.position.resize(d);
        p.velocity.resize(d);
        for (std::size_t j = 0; j < d; ++j) p.position[j] = rng.uniform();
        for (std::size_t j = 0; j < d; ++j) p.velocity[j] = rng.range(-config.v_max, config.v_max);
        p.pbest_position = p.position;
        p.pbest_fitness = 0.0;
        p.pbest_evaluated = false;
    }
    return swarm;
}

std::pair<double, double> pso_step(double v, double x, double pbest, double gbest,
                                   double inertia, double c1, double c2, double r1,
                                   double r2, double v_max) {
    double v_next =
        inertia * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x);
    v_next = std::clamp(v_next, -v_max, v_max);
    double x_next = std::clamp(x + v_next, 0.0, 1.0);
    return {v_next, x_next};
}

void update_particle(Particle& particle, const std::vector<double>& gbest_position,
                     const SwarmConfig& config, double inertia, Rng& rng) {
    std::size_t d = particle.position.size();
    if (gbest_position.size() != d || particle.velocity.size() != d ||
        particle.pbest_position.size() != d)
        throw std::invalid_argument("update_particle: dimension mismatch");

    for (std::size_t j = 0; j < d; ++j) {
        double r1 = rng.uniform();
        double r2 = rng.uniform();
        auto [v_next, x_next] =
            pso_step(particle.velocity[j], particle.position[j],
                     particle.pbest_position[j], gbest_position[j], inertia,
                     config.c1, config.c2, r1, r2, config.v_max);
        particle.velocity[j] = v_next;
        particle.position[j] = x_next;
    }
}

Mask decode(const std::vector<double>& position, double threshold) {
    Mask mask(position.size(), false);
    bool any = false;
    for (std::size_t j = 0; j < position.size(); ++j) {
        if (position[j] > threshold) {
            mask[j] = true;
            any = true;
        }
    }
    if (!any && !position.empty()) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < position.size(); ++j)
            if (position[j] > position[arg]) arg = j;
        mask[arg] = true;
    }
    return mask;
}

SearchResult pso_search(std::size_t d, const SwarmConfig& config, const Evaluator& evaluator) {
    if (d < 1) throw std::invalid_argument("pso_search: d must be >= 1");
    validate(config);

    MaskCache cache(evaluator);
    Swarm swarm = init_swarm(d, config);
    const std::size_t n = config.n_particles;
    const std::size_t iters = config.iterations;

    Mask gbest_mask;
    std::vector<double> gbest_position;
    double gbest_fitness = 0.0;
    bool gbest_set = false;

    auto consider_gbest = [&](const Particle& p, const Mask& mask, double fit) {
        if (!gbest_set || fit > gbest_fitness) {
            gbest_set = true;
            gbest_fitness = fit;
            gbest_position = p.position;
            gbest_mask = mask;
        }
    };

    std::size_t iteration = 0;
    for (auto& p : swarm.particles) {
        Mask mask = decode(p.position, config.decode_threshold);
        double fit;
        try {
            fit = cache.get(mask);
        } catch (const std::exception& e) {
            throw std::runtime_error("pso_search: evaluator failed at iteration " +
                                     std::to_string(iteration) + ": " + e.what());
        }
        p.pbest_fitness = fit;
        p.pbest_evaluated = true;
        consider_gbest(p, mask, fit);
    }

    SearchResult result;
    result.history.push_back(gbest_fitness);

    for (iteration = 1; iteration <= iters; ++iteration) {
        double inertia = (iters == 1)
                             ? config.w_start
                             : config.w_start + (config.w_end - config.w_start) *
                                                    static_cast<double>(iteration - 1) /
                                                    static_cast<double>(iters - 1);

        // synchronous step: all particles move against the previous bests
        const std::vector<double> gbest_pos_snapshot = gbest_position;
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(derive_seed(config.seed, kUpdateStream, iteration, i));
            update_particle(swarm.particles[i], gbest_pos_snapshot, config, inertia, rng);
        }
        for (std::size_t i = 0; i < n; ++i) {
            Particle& p = swarm.particles[i];
            Mask mask = decode(p.position, config.decode_threshold);
            double fit;
            try {
                fit = cache.get(mask);
            } catch (const std::exception& e) {
                throw std::runtime_error("pso_search: evaluator failed at iteration " +
                                         std::to_string(iteration) + ": " + e.what());
            }
            if (fit > p.pbest_fitness) {
                p.pbest_fitness = fit;
                p.pbest_position = p.position;
            }
            consider_gbest(p, mask, fit);
        }
        result.history.push_back(gbest_fitness);
    }

    result.best_mask = gbest_mask;
    result.best_fitness = gbest_fitness;
    result.evaluations = cache.misses();
    return result;
}

namespace {

void ensure_nonempty(Mask& chrom, Rng& rng) {
    if (popcount(chrom) == 0 && !chrom.empty()) chrom[rng.index(chrom.size())] = true;
}

} // namespace

SearchResult ga_search(std::size_t d, const GaConfig& config, const Evaluator& evaluator) {
    if (d < 1) throw std::invalid_argument("ga_search: d must be >= 1");
    if (config.population < 2) throw std::invalid_argument("ga_search: population must be >= 2");
    if (config.generations < 1) throw std::invalid_argument("ga_search: generations must be >= 1");
    if (config.tournament_size < 1)
        throw std::invalid_argument("ga_search: tournament_size must be >= 1");
    if (config.elitism >= config.population)
        throw std::invalid_argument("ga_search: elitism must be below population size");

    MaskCache cache(evaluator);
    Rng rng(derive_seed(config.seed, 0x6a6aULL));

    std::vector<Mask> pop(config.population);
    for (auto& chrom : pop) {
        chrom.resize(d);
        for (std::size_t j = 0; j < d; ++j) chrom[j] = rng.uniform() < 0.5;
        ensure_nonempty(chrom, rng);
    }

    auto evaluate_all = [&](const std::vector<Mask>& gen) {
        std::vector<double> fits(gen.size());
        for (std::size_t i = 0; i < gen.size(); ++i) fits[i] = cache.get(gen[i]);
        return fits;
    };

    std::vector<double> fits = evaluate_all(pop);
    SearchResult result;
    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (fits[i] > fits[best_idx]) best_idx = i;
    result.best_mask = pop[best_idx];
    result.best_fitness = fits[best_idx];
    result.history.push_back(result.best_fitness);

    auto tournament = [&]() -> std::size_t {
        std::size_t winner = rng.index(pop.size());
        for (std::size_t t = 1; t < config.tournament_size; ++t) {
            std::size_t rival = rng.index(pop.size());
            if (fits[rival] > fits[winner]) winner = rival;
        }
        return winner;
    };

    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        std::vector<Mask> next;
        next.reserve(pop.size());

        // elitism: carry the current best chromosomes unchanged
        std::vector<std::size_t> idx(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return fits[a] > fits[b]; });
        for (std::size_t e = 0; e < config.elitism; ++e) next.push_back(pop[idx[e]]);

        while (next.size() < pop.size()) {
            Mask child1 = pop[tournament()];
            Mask child2 = pop[tournament()];
            if (d >= 2 && rng.uniform() < config.crossover_rate) {
                std::size_t cut = 1 + rng.index(d - 1);
                for (std::size_t j = cut; j < d; ++j) {
                    bool tmp = child1[j];
                    child1[j] = child2[j];
                    child2[j] = tmp;
                }
            }
            for (auto* child : {&child1, &child2}) {
                for (std::size_t j = 0; j < d; ++j)
                    if (rng.uniform() < config.mutation_rate) (*child)[j] = !(*child)[j];
                ensure_nonempty(*child, rng);
            }
            next.push_back(std::move(child1));
            if (next.size() < pop.size()) next.push_back(std::move(child2));
        }

        pop = std::move(next);
        fits = evaluate_all(pop);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (fits[i] > result.best_fitness) {
                result.best_fitness = fits[i];
                result.best_mask = pop[i];
            }
        }
        result.history.push_back(result.best_fitness);
    }

    result.evaluations = cache.misses();
    return result;
}

} // namespace tpso
