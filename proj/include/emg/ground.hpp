#pragma once

// Ground sets that measures live on. Atoms of a measure are indices into a
// ground space, which owns the point registry and the ground metric. Two
// flavors: depth-T prefixes of shift points (metric = truncated d_X, per-entry
// error m^(1-T)), and an explicit finite metric table for abstract spaces.

#include "emg/numeric.hpp"
#include "emg/shift.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace emg {

using PointId = std::uint32_t;

class GroundSpace {
public:
    virtual ~GroundSpace() = default;

    virtual std::size_t size() const = 0;
    virtual double distance(PointId a, PointId b) const = 0;
    // Upper bound on |reported - true| per distance entry.
    virtual double entry_error() const = 0;
    virtual double diameter_bound() const = 0;
    virtual std::string key_string(PointId p) const = 0;
};

// Registry of depth-T symbol prefixes. Points with equal depth-T prefixes are
// merged; the merge error is absorbed by the m^(1-T) entry error.
class ShiftGround final : public GroundSpace {
public:
    ShiftGround(shift::Alphabet a, shift::TruncationDepth depth) : alphabet_(a), depth_(depth) {}

    static std::shared_ptr<ShiftGround> create(shift::Alphabet a, shift::TruncationDepth depth) {
        return std::make_shared<ShiftGround>(a, depth);
    }
    static std::shared_ptr<ShiftGround> create(shift::Alphabet a) {
        return std::make_shared<ShiftGround>(a, shift::TruncationDepth(a));
    }

    const shift::Alphabet& alphabet() const { return alphabet_; }
    int depth() const { return depth_.T; }

    PointId add_prefix(std::vector<shift::Symbol> prefix) {
        if (static_cast<int>(prefix.size()) != depth_.T)
            throw std::invalid_argument("prefix length must equal the truncation depth");
        auto it = index_.find(prefix);
        if (it != index_.end()) return it->second;
        const PointId id = static_cast<PointId>(points_.size());
        points_.push_back(prefix);
        index_.emplace(std::move(prefix), id);
        return id;
    }

    PointId add_point(const shift::ShiftPoint& x) {
        if (!(x.alphabet() == alphabet_)) throw std::invalid_argument("alphabet mismatch");
        return add_prefix(x.prefix(depth_.T));
    }

    const std::vector<shift::Symbol>& prefix(PointId p) const { return points_.at(p); }

    std::size_t size() const override { return points_.size(); }

    double distance(PointId a, PointId b) const override {
        if (a == b) return 0.0;
        return shift::prefix_metric(alphabet_, points_.at(a), points_.at(b));
    }

    double entry_error() const override { return shift::metric_tail_bound(alphabet_, depth_.T); }

    double diameter_bound() const override {
        return static_cast<double>(alphabet_.m);  // sup_x,y d(x,y) = (m-1) * m/(m-1)
    }

    std::string key_string(PointId p) const override {
        std::string s = "s:";
        for (shift::Symbol c : points_.at(p)) s.push_back(static_cast<char>('0' + c));
        return s;
    }

private:
    shift::Alphabet alphabet_;
    shift::TruncationDepth depth_;
    std::vector<std::vector<shift::Symbol>> points_;
    std::map<std::vector<shift::Symbol>, PointId> index_;
};

// Finite metric space given by an explicit symmetric table.
class TableGround final : public GroundSpace {
public:
    PointId add_point(std::string label) {
        const PointId id = static_cast<PointId>(labels_.size());
        labels_.push_back(std::move(label));
        for (auto& row : table_) row.push_back(0.0);
        table_.emplace_back(labels_.size(), 0.0);
        return id;
    }

    void set_distance(PointId a, PointId b, double d) {
        if (d < 0) throw std::invalid_argument("metric table entries must be nonnegative");
        table_.at(a).at(b) = d;
        table_.at(b).at(a) = d;
    }

    void set_entry_error(double e) { entry_error_ = e; }

    // Triangle inequality / symmetry audit; tolerance covers entry rounding.
    void validate(double tol = 1e-12) const {
        const std::size_t n = labels_.size();
        for (std::size_t a = 0; a < n; ++a) {
            if (table_[a][a] != 0.0) throw std::logic_error("nonzero self-distance");
            for (std::size_t b = 0; b < n; ++b)
                for (std::size_t c = 0; c < n; ++c)
                    if (table_[a][c] > table_[a][b] + table_[b][c] + tol)
                        throw std::logic_error("metric table violates the triangle inequality");
        }
    }

    std::size_t size() const override { return labels_.size(); }
    double distance(PointId a, PointId b) const override { return table_.at(a).at(b); }
    double entry_error() const override { return entry_error_; }
    double diameter_bound() const override {
        double d = 0.0;
        for (const auto& row : table_)
            for (double x : row) d = std::max(d, x);
        return d;
    }
    std::string key_string(PointId p) const override { return "a:" + labels_.at(p); }

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<double>> table_;
    double entry_error_ = 0.0;
};

}  // namespace emg
