#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "radiosem/genmodel.hpp"

namespace radiosem {

/// One simulated client. Only ModelParams and the dataset size ever cross
/// the client boundary during federation.
struct ClientState {
    int id = 0;
    std::vector<TrainSample> dataset;
    std::size_t dataset_size() const { return dataset.size(); }
};

struct FedConfig {
    int rounds = 10;            // T
    int local_epochs = 2;       // E
    int clients_per_round = 0;  // k; 0 means the full pool
    std::uint64_t seed = 0;
    bool aggregate_discriminator = true;
    TrainConfig train;
};

/// k client ids sampled uniformly without replacement, deterministic in
/// (seed, round). k equal to the pool size returns every id; results are
/// always in ascending id order.
std::vector<int> sample_clients(const std::vector<ClientState>& pool, int k,
                                int round, std::uint64_t seed);

struct LocalUpdate {
    int client_id = 0;
    std::size_t dataset_size = 0;
    ModelParams generator;
    ModelParams discriminator;
    EpochStats final_stats;
};

/// Copies the global parameters, runs E local epochs on the client's shard
/// and returns the updated parameters; the caller's copies are untouched.
LocalUpdate local_update(const ClientState& client, const ModelParams& gen_global,
                         const ModelParams& disc_global, int epochs,
                         const TrainConfig& cfg);

/// Dataset-size-weighted coordinatewise mean. Summation runs in the given
/// order, which fed_train fixes to ascending client id.
ModelParams aggregate(const std::vector<std::pair<ModelParams, std::size_t>>& updates);

struct ClientRoundStats {
    int client_id = 0;
    EpochStats stats;
};

struct RoundStats {
    int round = 0;
    double global_mse = 0.0;
    double global_nmse = 0.0;
    std::vector<ClientRoundStats> clients;
};

struct FedResult {
    ModelParams generator;
    ModelParams discriminator;
    std::vector<RoundStats> history;
};

/// Algorithm: T rounds of sample -> broadcast -> local update -> aggregate,
/// evaluating the global generator on the test set after each round.
FedResult fed_train(const std::vector<ClientState>& pool,
                    const std::vector<TrainSample>& test_set, const FedConfig& cfg);

/// CSV: round, global_mse, global_nmse, then per-client id:loss triples.
void write_round_metrics_csv(const std::filesystem::path& path,
                             const std::vector<RoundStats>& history);

}  // namespace radiosem
