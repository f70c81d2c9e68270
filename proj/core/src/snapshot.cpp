#include "bond/snapshot.hpp"

#include "bond/errors.hpp"

#include <bit>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace bond {

namespace {

const char* activation_tag(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation activation_from_tag(const std::string& tag) {
    if (tag == "relu") return Activation::ReLU;
    if (tag == "tanh") return Activation::Tanh;
    if (tag == "identity") return Activation::Identity;
    throw parse_error("snapshot: unknown activation tag \"" + tag + "\"");
}

} // namespace

void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("save_tensors: cannot open " + path);
    out << "BONDW 1\n";
    out << "tensors " << tensors.size() << "\n";
    for (const auto& t : tensors) {
        out << "tensor " << t.name << " " << t.value.rows() << " " << t.value.cols() << " "
            << (t.tag.empty() ? "-" : t.tag) << "\n";
    }
    out << "data\n";
    for (const auto& t : tensors) {
        out.write(reinterpret_cast<const char*>(t.value.data().data()),
                  static_cast<std::streamsize>(t.value.size() * sizeof(double)));
    }
    if (!out) throw parse_error("save_tensors: write failed for " + path);
}

std::vector<NamedTensor> load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("load_tensors: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "BONDW 1") {
        throw parse_error("load_tensors: bad magic in " + path);
    }
    std::size_t count = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "tensors %zu", &count) != 1) {
        throw parse_error("load_tensors: missing tensor count");
    }
    std::vector<NamedTensor> tensors(count);
    for (auto& t : tensors) {
        if (!std::getline(in, line)) throw parse_error("load_tensors: truncated header");
        std::istringstream fields(line);
        std::string keyword;
        std::size_t rows = 0, cols = 0;
        fields >> keyword >> t.name >> rows >> cols >> t.tag;
        if (keyword != "tensor" || fields.fail()) {
            throw parse_error("load_tensors: malformed tensor line: " + line);
        }
        t.value = Tensor2(rows, cols);
    }
    if (!std::getline(in, line) || line != "data") {
        throw parse_error("load_tensors: missing data marker");
    }
    for (auto& t : tensors) {
        in.read(reinterpret_cast<char*>(t.value.data().data()),
                static_cast<std::streamsize>(t.value.size() * sizeof(double)));
        if (!in) throw parse_error("load_tensors: truncated data section");
    }
    return tensors;
}

void save_net(const FeedForwardNet& net, const std::string& path) {
    std::vector<NamedTensor> tensors;
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        const auto& layer = net.layers()[i];
        tensors.push_back({"layer" + std::to_string(i) + ".weights",
                           activation_tag(layer.activation), layer.weights});
        tensors.push_back({"layer" + std::to_string(i) + ".bias", "-", layer.bias});
    }
    save_tensors(path, tensors);
}

FeedForwardNet load_net(const std::string& path) {
    const std::vector<NamedTensor> tensors = load_tensors(path);
    if (tensors.empty() || tensors.size() % 2 != 0) {
        throw parse_error("load_net: expected weight/bias tensor pairs");
    }
    std::vector<LinearLayer> layers;
    for (std::size_t i = 0; i < tensors.size(); i += 2) {
        LinearLayer layer;
        layer.weights = tensors[i].value;
        layer.activation = activation_from_tag(tensors[i].tag);
        layer.bias = tensors[i + 1].value;
        if (layer.bias.rows() != 1 || layer.bias.cols() != layer.weights.rows()) {
            throw parse_error("load_net: bias shape does not match weights");
        }
        layers.push_back(std::move(layer));
    }
    return FeedForwardNet::from_layers(std::move(layers));
}

} // namespace bond
