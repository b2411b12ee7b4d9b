#pragma once

// Retina left-and-right object recognition with layered feedforward networks.
//
// An 8-pixel retina is split into a left and a right 4-pixel half. A network
// answers true iff its output is >= 0; the target is true iff the left half
// shows a left object AND the right half shows a right object. Fitness is the
// fraction of the 256 input patterns answered correctly.
//
// Descriptor: (normalized connection cost, modularity), both in [0, 1].
// Connection cost sums the squared Euclidean length of enabled connections
// with node k of layer l placed at (k - (size_l - 1) / 2, l); it is divided
// by the cost of the fully connected network. Modularity is the greedy
// directed Q of the enabled-connection graph, negatives clamped to 0.

#include <algorithm>
#include <array>
#include <bitset>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../errors.hpp"
#include "domain.hpp"
#include "modularity.hpp"

namespace mapelites {

/// Which 4-bit half-patterns count as objects. Pattern strings list pixels
/// left to right; the leftmost pixel is the most significant bit.
struct ObjectSets {
    std::vector<std::uint8_t> left;
    std::vector<std::uint8_t> right;

    static std::uint8_t parse_pattern(std::string_view s)
    {
        if (s.size() != 4)
            throw ConfigError("objects", "pattern '" + std::string(s) + "' must have 4 pixels");
        std::uint8_t v = 0;
        for (char c : s) {
            if (c != '0' && c != '1')
                throw ConfigError("objects", "pattern '" + std::string(s) + "' must be 0/1 characters");
            v = static_cast<std::uint8_t>((v << 1) | (c == '1'));
        }
        return v;
    }

    static std::string format_pattern(std::uint8_t v)
    {
        return std::bitset<4>(v).to_string();
    }

    /// Default object sets, eight per side; the right set mirrors the left.
    static ObjectSets defaults()
    {
        ObjectSets s;
        for (const char* p : {"0111", "1011", "1101", "1110", "0011", "0110", "0001", "1111"})
            s.left.push_back(parse_pattern(p));
        for (const char* p : {"1110", "1101", "1011", "0111", "1100", "0110", "1000", "1111"})
            s.right.push_back(parse_pattern(p));
        return s;
    }

    /// Text format: a `[left]` line, patterns one per line, a `[right]` line,
    /// patterns one per line. Blank lines and `#` comments are ignored.
    static ObjectSets parse(std::istream& in)
    {
        ObjectSets s;
        std::vector<std::uint8_t>* current = nullptr;
        std::string line;
        while (std::getline(in, line)) {
            if (auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line.erase(0, line.find_first_not_of(" \t\r"));
            line.erase(line.find_last_not_of(" \t\r") + 1);
            if (line.empty())
                continue;
            if (line == "[left]")
                current = &s.left;
            else if (line == "[right]")
                current = &s.right;
            else if (!current)
                throw ConfigError("objects", "pattern before a [left] or [right] section");
            else
                current->push_back(parse_pattern(line));
        }
        if (s.left.empty() || s.right.empty())
            throw ConfigError("objects", "both [left] and [right] need at least one pattern");
        return s;
    }

    static ObjectSets load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("objects", "cannot open '" + path + "'");
        return parse(in);
    }

    std::string to_text() const
    {
        std::string out = "[left]\n";
        for (auto p : left)
            out += format_pattern(p) + '\n';
        out += "[right]\n";
        for (auto p : right)
            out += format_pattern(p) + '\n';
        return out;
    }
};

struct RetinaParams {
    std::vector<std::size_t> layers{8, 4, 2, 1};
    double weight_range = 2.0; // weights in [-range, range]
    double bias_range = 2.0;
    // Presence rate for random genomes; unset draws a fresh rate per genome
    // from U(0,1) so initial networks span the whole connection-cost axis.
    std::optional<double> connection_probability;
    double toggle_rate = 0.02;
    double weight_rate = 0.05;
    double weight_sigma = 0.5;
    double bias_rate = 0.05;
    double bias_sigma = 0.5;
    ObjectSets objects = ObjectSets::defaults();
};

struct RetinaGenome {
    std::vector<std::size_t> layers;
    std::vector<std::uint8_t> present; // one per connection, see RetinaDomain
    std::vector<double> weights;
    std::vector<double> biases; // one per non-input node

    bool operator==(const RetinaGenome&) const = default;
};

/// Connections run between adjacent layers only and are ordered by layer
/// pair, then destination node, then source node.
class RetinaDomain {
public:
    using Genome = RetinaGenome;

    struct Node {
        double x;
        double y;
    };

    struct Connection {
        std::size_t from; // global node index
        std::size_t to;
    };

    explicit RetinaDomain(RetinaParams params = {}) : params_(std::move(params))
    {
        const auto& layers = params_.layers;
        if (layers.size() < 2 || layers.front() != 8 || layers.back() != 1)
            throw ConfigError("layers", "need 8 input nodes, one output node and at least two layers");
        for (auto s : layers)
            if (s == 0)
                throw ConfigError("layers", "layer sizes must be positive");
        if (!(params_.weight_range > 0.0) || !(params_.bias_range > 0.0))
            throw ConfigError("weight range", "ranges must be positive");
        if (params_.connection_probability &&
            !(*params_.connection_probability >= 0.0 && *params_.connection_probability <= 1.0))
            throw ConfigError("connection probability", "must lie in [0, 1]");

        for (std::size_t l = 0; l < layers.size(); ++l) {
            layer_start_.push_back(nodes_.size());
            for (std::size_t k = 0; k < layers[l]; ++k)
                nodes_.push_back({static_cast<double>(k) - (static_cast<double>(layers[l]) - 1.0) / 2.0,
                                  static_cast<double>(l)});
        }
        for (std::size_t l = 0; l + 1 < layers.size(); ++l)
            for (std::size_t j = 0; j < layers[l + 1]; ++j)
                for (std::size_t i = 0; i < layers[l]; ++i)
                    connections_.push_back({layer_start_[l] + i, layer_start_[l + 1] + j});
        for (const auto& c : connections_)
            max_cost_ += squared_length(c);

        for (auto p : params_.objects.left)
            left_object_[p & 0xF] = true;
        for (auto p : params_.objects.right)
            right_object_[p & 0xF] = true;
    }

    std::string name() const { return "retina"; }
    std::size_t descriptor_dims() const { return 2; }
    std::vector<Interval> bounds() const { return {{0.0, 1.0}, {0.0, 1.0}}; }
    std::vector<std::string> labels() const { return {"connection_cost", "modularity"}; }

    const RetinaParams& params() const noexcept { return params_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Connection>& connections() const noexcept { return connections_; }
    std::size_t connection_count() const noexcept { return connections_.size(); }
    std::size_t bias_count() const noexcept { return nodes_.size() - params_.layers.front(); }
    double max_connection_cost() const noexcept { return max_cost_; }

    /// Target answer for an 8-bit pattern; pixel 0 is the most significant bit.
    bool target(unsigned pattern) const noexcept
    {
        return left_object_[(pattern >> 4) & 0xF] && right_object_[pattern & 0xF];
    }

    Genome zero_genome() const
    {
        return {params_.layers, std::vector<std::uint8_t>(connection_count(), 0),
                std::vector<double>(connection_count(), 0.0), std::vector<double>(bias_count(), 0.0)};
    }

    Genome random_genome(Rng& rng) const
    {
        Genome g = zero_genome();
        const double rate = params_.connection_probability ? *params_.connection_probability : uniform01(rng);
        std::bernoulli_distribution on(rate);
        std::uniform_real_distribution<double> w(-params_.weight_range, params_.weight_range);
        std::uniform_real_distribution<double> b(-params_.bias_range, params_.bias_range);
        for (std::size_t c = 0; c < g.present.size(); ++c) {
            g.present[c] = on(rng);
            g.weights[c] = w(rng);
        }
        for (auto& v : g.biases)
            v = b(rng);
        return g;
    }

    /// Toggles connections, perturbs weights and biases. If nothing changed,
    /// one uniformly chosen gene is forced to change.
    Genome mutate(const Genome& parent, Rng& rng) const
    {
        Genome g = parent;
        std::normal_distribution<double> wstep(0.0, params_.weight_sigma);
        std::normal_distribution<double> bstep(0.0, params_.bias_sigma);
        for (std::size_t c = 0; c < g.present.size(); ++c) {
            if (uniform01(rng) < params_.toggle_rate)
                g.present[c] ^= 1;
            if (uniform01(rng) < params_.weight_rate)
                g.weights[c] = std::clamp(g.weights[c] + wstep(rng), -params_.weight_range, params_.weight_range);
        }
        for (auto& v : g.biases)
            if (uniform01(rng) < params_.bias_rate)
                v = std::clamp(v + bstep(rng), -params_.bias_range, params_.bias_range);
        if (g == parent)
            force_change(g, rng);
        return g;
    }

    double connection_cost(const Genome& g) const
    {
        double cost = 0.0;
        for (std::size_t c = 0; c < connections_.size(); ++c)
            if (g.present[c])
                cost += squared_length(connections_[c]);
        return cost;
    }

    double normalized_connection_cost(const Genome& g) const { return connection_cost(g) / max_cost_; }

    Digraph graph(const Genome& g) const
    {
        Digraph d;
        d.nodes = nodes_.size();
        for (std::size_t c = 0; c < connections_.size(); ++c)
            if (g.present[c])
                d.edges.emplace_back(connections_[c].from, connections_[c].to);
        return d;
    }

    /// Greedy directed modularity; 0 for a network without connections.
    double modularity(const Genome& g) const { return greedy_modularity(graph(g)).q; }

    double fitness(const Genome& g) const
    {
        check(g);
        const auto& layers = params_.layers;
        std::vector<double> act(nodes_.size());
        std::size_t correct = 0;
        for (unsigned pattern = 0; pattern < 256; ++pattern) {
            for (std::size_t i = 0; i < 8; ++i)
                act[i] = (pattern >> (7 - i)) & 1u ? 1.0 : -1.0;
            std::size_t conn = 0;
            double out = 0.0;
            for (std::size_t l = 1; l < layers.size(); ++l) {
                const std::size_t src = layer_start_[l - 1];
                for (std::size_t j = 0; j < layers[l]; ++j) {
                    const std::size_t node = layer_start_[l] + j;
                    double sum = g.biases[node - layers.front()];
                    for (std::size_t i = 0; i < layers[l - 1]; ++i, ++conn)
                        if (g.present[conn])
                            sum += g.weights[conn] * act[src + i];
                    if (l + 1 == layers.size())
                        out = sum;
                    else
                        act[node] = std::tanh(sum);
                }
            }
            correct += (out >= 0.0) == target(pattern);
        }
        return static_cast<double>(correct) / 256.0;
    }

    Evaluation evaluate(const Genome& g) const
    {
        const double q = std::max(modularity(g), 0.0);
        return {fitness(g), {normalized_connection_cost(g), std::min(q, 1.0)}};
    }

    /// `8-4-2-1|p:w;p:w;...|b,b,...` with weights and biases at 17 digits.
    std::string encode(const Genome& g) const
    {
        std::string out;
        for (std::size_t l = 0; l < g.layers.size(); ++l) {
            if (l)
                out += '-';
            out += std::to_string(g.layers[l]);
        }
        out += '|';
        for (std::size_t c = 0; c < g.present.size(); ++c) {
            if (c)
                out += ';';
            out += g.present[c] ? "1:" : "0:";
            out += detail::format_real(g.weights[c]);
        }
        out += '|';
        for (std::size_t b = 0; b < g.biases.size(); ++b) {
            if (b)
                out += ',';
            out += detail::format_real(g.biases[b]);
        }
        return out;
    }

    Genome decode(std::string_view text) const
    {
        const auto parts = detail::split(text, '|');
        if (parts.size() != 3)
            throw FormatError("retina genome needs three '|'-separated sections");
        Genome g;
        for (auto s : detail::split(parts[0], '-'))
            g.layers.push_back(static_cast<std::size_t>(parse_real(s)));
        if (g.layers != params_.layers)
            throw FormatError("retina genome layer sizes do not match the domain");
        if (!parts[1].empty())
            for (auto s : detail::split(parts[1], ';')) {
                if (s.size() < 3 || s[1] != ':' || (s[0] != '0' && s[0] != '1'))
                    throw FormatError("bad retina connection '" + std::string(s) + "'");
                g.present.push_back(s[0] == '1');
                g.weights.push_back(parse_real(s.substr(2)));
            }
        if (!parts[2].empty())
            for (auto s : detail::split(parts[2], ','))
                g.biases.push_back(parse_real(s));
        check(g);
        return g;
    }

private:
    static double parse_real(std::string_view s)
    {
        try {
            std::size_t used = 0;
            const std::string str(s);
            const double v = std::stod(str, &used);
            if (used != str.size())
                throw FormatError("trailing characters in '" + str + "'");
            return v;
        } catch (const std::logic_error&) {
            throw FormatError("not a number: '" + std::string(s) + "'");
        }
    }

    void check(const Genome& g) const
    {
        if (g.present.size() != connection_count() || g.weights.size() != connection_count() ||
            g.biases.size() != bias_count())
            throw FormatError("retina genome does not match the network topology");
    }

    double squared_length(const Connection& c) const
    {
        const double dx = nodes_[c.from].x - nodes_[c.to].x;
        const double dy = nodes_[c.from].y - nodes_[c.to].y;
        return dx * dx + dy * dy;
    }

    void force_change(Genome& g, Rng& rng) const
    {
        const std::size_t loci = 2 * g.present.size() + g.biases.size();
        std::uniform_int_distribution<std::size_t> pick(0, loci - 1);
        const std::size_t locus = pick(rng);
        if (locus < g.present.size()) {
            g.present[locus] ^= 1;
            return;
        }
        auto resample = [&rng](double& v, double range) {
            std::uniform_real_distribution<double> u(-range, range);
            const double old = v;
            do
                v = u(rng);
            while (v == old);
        };
        if (locus < 2 * g.present.size())
            resample(g.weights[locus - g.present.size()], params_.weight_range);
        else
            resample(g.biases[locus - 2 * g.present.size()], params_.bias_range);
    }

    RetinaParams params_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> layer_start_;
    std::vector<Connection> connections_;
    double max_cost_ = 0.0;
    std::array<bool, 16> left_object_{};
    std::array<bool, 16> right_object_{};
};

} // namespace mapelites
