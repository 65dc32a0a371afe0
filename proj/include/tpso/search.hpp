#pragma once

#include "tpso/dataset.hpp"
#include "tpso/rng.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace tpso {

struct SwarmConfig {
    std::size_t n_particles = 50;
    std::size_t iterations = 100;
    double c1 = 2.0; // cognitive factor
    double c2 = 2.0; // social factor
    double w_start = 0.9;
    double w_end = 0.4;
    double v_max = 4.0;
    double decode_threshold = 0.5;
    std::uint64_t seed = 0;
};

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> pbest_position;
    double pbest_fitness = 0.0;
    bool pbest_evaluated = false;
};

struct Swarm {
    std::vector<Particle> particles;
};

struct SearchResult {
    Mask best_mask;
    double best_fitness = 0.0;
    std::size_t evaluations = 0;       // evaluator invocations (cache misses)
    std::vector<double> history;       // best-so-far fitness, initial + per iteration
};

using Evaluator = std::function<double(const Mask&)>;

// Positions uniform in [0,1]^d, velocities uniform in [-v_max, v_max];
// pbest set to the initial position, fitness not yet evaluated.
Swarm init_swarm(std::size_t d, const SwarmConfig& config);

// Single-dimension velocity/position step: v' = w*v + c1*r1*(pbest - x) +
// c2*r2*(gbest - x) clamped to [-v_max, v_max], then x' = x + v' clamped to
// [0, 1]. Returns (v', x').
std::pair<double, double> pso_step(double v, double x, double pbest, double gbest,
                                   double inertia, double c1, double c2, double r1,
                                   double r2, double v_max);

// One velocity/position step against the previous-iteration bests. Fresh
// uniform draws r1, r2 per dimension; velocity clamped to [-v_max, v_max],
// position to [0, 1].
void update_particle(Particle& particle, const std::vector<double>& gbest_position,
                     const SwarmConfig& config, double inertia, Rng& rng);

// mask[j] = position[j] > threshold; an all-zero result keeps the single
// dimension with the largest position value.
Mask decode(const std::vector<double>& position, double threshold);

// Synchronous-update PSO over binary masks decoded from continuous
// positions. Inertia interpolates linearly from w_start to w_end across the
// iterations; evaluator results are cached per distinct mask; gbest ties
// keep the earlier particle. Deterministic given the config seed.
SearchResult pso_search(std::size_t d, const SwarmConfig& config, const Evaluator& evaluator);

struct GaConfig {
    std::size_t population = 50;
    std::size_t generations = 100;
    double crossover_rate = 1.0;
    double mutation_rate = 0.001;
    std::size_t tournament_size = 2;
    std::size_t elitism = 1;
    std::uint64_t seed = 0;
};

// Generational GA on bit-string chromosomes: tournament selection,
// single-point crossover, per-bit mutation, elitism. All-zero chromosomes
// get one random bit set before evaluation.
SearchResult ga_search(std::size_t d, const GaConfig& config, const Evaluator& evaluator);

} // namespace tpso
