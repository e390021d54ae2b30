#include "radiosem/fedtrain.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <string>

#include "radiosem/metrics.hpp"
#include "radiosem/rng.hpp"

namespace radiosem {

std::vector<int> sample_clients(const std::vector<ClientState>& pool, int k,
                                int round, std::uint64_t seed) {
    if (k < 1 || static_cast<std::size_t>(k) > pool.size()) {
        throw KTooLarge("cannot sample " + std::to_string(k) + " of " +
                        std::to_string(pool.size()) + " clients");
    }
    std::vector<int> ids;
    ids.reserve(pool.size());
    for (const auto& c : pool) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    if (static_cast<std::size_t>(k) == pool.size()) return ids;

    // Partial Fisher-Yates over the id-sorted pool, seeded per round.
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(round)));
    for (int i = 0; i < k; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(bounded(rng, ids.size() - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    return ids;
}

LocalUpdate local_update(const ClientState& client, const ModelParams& gen_global,
                         const ModelParams& disc_global, int epochs,
                         const TrainConfig& cfg) {
    if (client.dataset.empty()) {
        throw EmptyDataset("client " + std::to_string(client.id) + " has no data");
    }
    const int in_ch = client.dataset.front().features.channels();
    if (gen_global.layout != generator_layout(in_ch) ||
        disc_global.layout != discriminator_layout(in_ch + 1) ||
        gen_global.values.size() != gen_global.layout.param_count() ||
        disc_global.values.size() != disc_global.layout.param_count()) {
        throw LayoutMismatch("global parameters do not fit the client's data");
    }
    TrainConfig local = cfg;
    local.epochs = epochs;
    TrainResult r = train_from(gen_global, disc_global, client.dataset, local);
    LocalUpdate up;
    up.client_id = client.id;
    up.dataset_size = client.dataset_size();
    up.generator = std::move(r.generator);
    up.discriminator = std::move(r.discriminator);
    up.final_stats = r.history.empty() ? EpochStats{} : r.history.back();
    return up;
}

ModelParams aggregate(const std::vector<std::pair<ModelParams, std::size_t>>& updates) {
    if (updates.empty()) throw EmptyUpdateSet("nothing to aggregate");
    const NetLayout& layout = updates.front().first.layout;
    double total = 0.0;
    for (const auto& [params, size] : updates) {
        if (params.layout != layout || params.values.size() != layout.param_count()) {
            throw LayoutMismatch("update layouts disagree");
        }
        total += static_cast<double>(size);
    }
    if (total <= 0.0) throw EmptyUpdateSet("all dataset sizes are zero");

    ModelParams out{layout, std::vector<double>(layout.param_count(), 0.0)};
    for (const auto& [params, size] : updates) {
        const double w = static_cast<double>(size) / total;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            out.values[i] += w * params.values[i];
        }
    }
    return out;
}

namespace {

std::pair<double, double> evaluate_global(const ModelParams& gen,
                                          const std::vector<TrainSample>& test_set) {
    if (test_set.empty()) return {0.0, 0.0};
    double mse_acc = 0.0;
    double nmse_acc = 0.0;
    for (const auto& s : test_set) {
        const GridMap y_hat = generator_forward(gen, s.features);
        mse_acc += mse(y_hat, s.target.retagged(MapKind::NormalizedPower));
        nmse_acc += nmse(y_hat, s.target.retagged(MapKind::NormalizedPower));
    }
    const double inv = 1.0 / static_cast<double>(test_set.size());
    return {mse_acc * inv, nmse_acc * inv};
}

}  // namespace

FedResult fed_train(const std::vector<ClientState>& pool,
                    const std::vector<TrainSample>& test_set, const FedConfig& cfg) {
    if (pool.empty()) throw EmptyDataset("client pool is empty");
    for (const auto& c : pool) {
        if (c.dataset.empty()) {
            throw EmptyDataset("client " + std::to_string(c.id) + " has no data");
        }
    }
    const int k = cfg.clients_per_round == 0 ? static_cast<int>(pool.size())
                                             : cfg.clients_per_round;
    const int in_ch = pool.front().dataset.front().features.channels();

    FedResult result;
    result.generator = init_params(generator_layout(in_ch), mix_seed(cfg.seed, 1));
    result.discriminator =
        init_params(discriminator_layout(in_ch + 1), mix_seed(cfg.seed, 2));

    for (int round = 0; round < cfg.rounds; ++round) {
        const std::vector<int> selected = sample_clients(pool, k, round, cfg.seed);
        RoundStats stats;
        stats.round = round;

        std::vector<std::pair<ModelParams, std::size_t>> gen_updates;
        std::vector<std::pair<ModelParams, std::size_t>> disc_updates;
        for (int id : selected) {  // ascending id: fixed aggregation order
            const auto it = std::find_if(pool.begin(), pool.end(),
                                         [id](const ClientState& c) { return c.id == id; });
            TrainConfig local = cfg.train;
            local.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(round),
                                  static_cast<std::uint64_t>(id));
            LocalUpdate up = local_update(*it, result.generator, result.discriminator,
                                          cfg.local_epochs, local);
            stats.clients.push_back({id, up.final_stats});
            gen_updates.emplace_back(std::move(up.generator), up.dataset_size);
            disc_updates.emplace_back(std::move(up.discriminator), up.dataset_size);
        }
        result.generator = aggregate(gen_updates);
        if (cfg.aggregate_discriminator) {
            result.discriminator = aggregate(disc_updates);
        }
        std::tie(stats.global_mse, stats.global_nmse) =
            evaluate_global(result.generator, test_set);
        result.history.push_back(std::move(stats));
    }
    return result;
}

void write_round_metrics_csv(const std::filesystem::path& path,
                             const std::vector<RoundStats>& history) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "round,global_mse,global_nmse,client_losses\n";
    out << std::setprecision(12);
    for (const auto& r : history) {
        out << r.round << ',' << r.global_mse << ',' << r.global_nmse << ',';
        for (std::size_t i = 0; i < r.clients.size(); ++i) {
            if (i) out << ' ';
            out << r.clients[i].client_id << ':' << r.clients[i].stats.loss_d << ':'
                << r.clients[i].stats.loss_g << ':' << r.clients[i].stats.loss_mse;
        }
        out << '\n';
    }
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace radiosem
