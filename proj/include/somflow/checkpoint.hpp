#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "somflow/adam.hpp"
#include "somflow/critic.hpp"
#include "somflow/mlp.hpp"
#include "somflow/policy.hpp"

namespace somflow {

using Json = nlohmann::ordered_json;

inline Json net_to_json(const Mlp& net, const AdamState* opt = nullptr) {
    Json j;
    j["schema_version"] = 1;
    j["layer_sizes"] = net.layer_sizes();
    j["weights"] = net.weights();
    j["biases"] = net.biases();
    if (opt) {
        Json o;
        o["m_weights"] = opt->m_weights;
        o["v_weights"] = opt->v_weights;
        o["m_biases"] = opt->m_biases;
        o["v_biases"] = opt->v_biases;
        o["step_count"] = opt->step_count;
        o["skipped"] = opt->skipped;
        j["optimizer_state"] = std::move(o);
    } else {
        j["optimizer_state"] = nullptr;
    }
    return j;
}

inline Mlp net_from_json(const Json& j, AdamState* opt = nullptr) {
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw std::runtime_error("checkpoint: unsupported schema_version");
    auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
    Mlp net = Mlp::from_parameters(std::move(sizes), std::move(weights), std::move(biases));
    if (opt) {
        *opt = AdamState::for_net(net);
        if (j.contains("optimizer_state") && !j["optimizer_state"].is_null()) {
            const Json& o = j["optimizer_state"];
            auto mw = o.at("m_weights").get<std::vector<std::vector<double>>>();
            auto vw = o.at("v_weights").get<std::vector<std::vector<double>>>();
            auto mb = o.at("m_biases").get<std::vector<std::vector<double>>>();
            auto vb = o.at("v_biases").get<std::vector<std::vector<double>>>();
            for (std::size_t l = 0; l < mw.size(); ++l) {
                if (mw[l].size() != opt->m_weights[l].size() ||
                    mb[l].size() != opt->m_biases[l].size())
                    throw std::runtime_error("checkpoint: optimizer state shape mismatch");
            }
            opt->m_weights = std::move(mw);
            opt->v_weights = std::move(vw);
            opt->m_biases = std::move(mb);
            opt->v_biases = std::move(vb);
            opt->step_count = o.at("step_count").get<std::int64_t>();
            opt->skipped = o.at("skipped").get<std::int64_t>();
        }
    }
    return net;
}

inline Json policy_to_json(const MeanFlowPolicy& policy, const AdamState* opt = nullptr) {
    Json j = net_to_json(policy.net, opt);
    j["action_dim"] = policy.action_dim;
    j["state_dim"] = policy.state_dim;
    return j;
}

inline MeanFlowPolicy policy_from_json(const Json& j, AdamState* opt = nullptr) {
    MeanFlowPolicy p;
    p.net = net_from_json(j, opt);
    p.action_dim = j.at("action_dim").get<std::size_t>();
    p.state_dim = j.at("state_dim").get<std::size_t>();
    if (p.net.input_dim() != p.action_dim + 2 + p.state_dim ||
        p.net.output_dim() != p.action_dim)
        throw std::runtime_error("checkpoint: policy dimensions inconsistent");
    return p;
}

inline void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    Json j;
    in >> j;
    return j;
}

}  // namespace somflow
