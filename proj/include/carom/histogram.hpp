#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carom/errors.hpp"

// Score-sheet ingestion: innings-score histograms and the empirical
// survival curve mu_n = P(score at least n points in an inning).

namespace carom {

// Resource bound for survival-curve allocation; the longest run on
// record is around 3000 points.
inline constexpr int kMaxScore = 1000000;

// Histogram of points-per-inning over a set of complete innings.
// Keys are scores (>= 0), values are occurrence counts (>= 1).
class ScoreHistogram {
public:
    using Entries = std::map<int, std::int64_t>;

    explicit ScoreHistogram(Entries entries)
        : entries_(std::move(entries)) {
        for (const auto& [score, count] : entries_) {
            if (score < 0)
                throw ValidationError("negative score " + std::to_string(score));
            if (score > kMaxScore)
                throw ValidationError("score " + std::to_string(score) +
                                      " exceeds the supported maximum");
            if (count <= 0)
                throw ValidationError("non-positive count for score " +
                                      std::to_string(score));
            total_ += count;
        }
        if (total_ == 0) throw ValidationError("histogram has no innings");
    }

    const Entries& entries() const { return entries_; }
    std::int64_t total_innings() const { return total_; }
    int max_score() const { return entries_.rbegin()->first; }

    bool operator==(const ScoreHistogram&) const = default;

private:
    Entries entries_;
    std::int64_t total_ = 0;
};

// Survival curve mu_0..mu_max: mu_0 = 1, non-increasing, final entry 0
// (one past the largest score-able run).
class SurvivalCurve {
public:
    explicit SurvivalCurve(std::vector<double> values)
        : values_(std::move(values)) {
        if (values_.size() < 2 || values_.front() != 1.0)
            throw ValidationError("survival curve must start at mu_0 = 1");
        for (std::size_t n = 0; n + 1 < values_.size(); ++n) {
            if (values_[n + 1] > values_[n])
                throw ValidationError("survival curve increases at n = " +
                                      std::to_string(n + 1));
        }
        if (values_.back() != 0.0)
            throw ValidationError("survival curve must end at 0");
        if (values_.size() > 2 && values_[values_.size() - 2] <= 0.0)
            throw ValidationError("survival curve must have exactly one trailing zero");
    }

    const std::vector<double>& values() const { return values_; }
    // Index of the trailing zero, i.e. largest n with mu_n > 0, plus one.
    std::size_t max_index() const { return values_.size() - 1; }
    // mu_n, extended by zero beyond the stored range.
    double operator[](std::size_t n) const {
        return n < values_.size() ? values_[n] : 0.0;
    }

private:
    std::vector<double> values_;
};

// Parses two-column score-sheet text: "score count" per line, fields
// separated by whitespace or commas, '#' comments, blank lines ignored.
// Duplicate scores have their counts summed.
inline ScoreHistogram parse_histogram(std::string_view text) {
    ScoreHistogram::Entries entries;
    int line_no = 0;
    std::size_t pos = 0;
    bool saw_data = false;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == '#') break;
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                if (!cur.empty()) fields.push_back(std::move(cur)), cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) fields.push_back(std::move(cur));
        if (fields.empty()) continue;

        if (fields.size() != 2)
            throw ParseError("line " + std::to_string(line_no) + ": expected 2 fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        long long vals[2];
        for (int f = 0; f < 2; ++f) {
            const std::string& tok = fields[f];
            std::size_t used = 0;
            try {
                vals[f] = std::stoll(tok, &used);
            } catch (const std::exception&) {
                used = std::string::npos;
            }
            if (used != tok.size())
                throw ParseError("line " + std::to_string(line_no) + ": not an integer: '" +
                                     tok + "'",
                                 line_no);
        }
        if (vals[0] < 0)
            throw ValidationError("line " + std::to_string(line_no) + ": negative score");
        if (vals[1] <= 0)
            throw ValidationError("line " + std::to_string(line_no) + ": non-positive count");
        entries[static_cast<int>(vals[0])] += vals[1];
        saw_data = true;
    }
    if (!saw_data) throw ValidationError("no data lines in input");
    return ScoreHistogram(std::move(entries));
}

// mu_n = (# innings with score >= n) / total. mu_0 = 1 by construction.
inline SurvivalCurve empirical_survival(const ScoreHistogram& h) {
    const int top = h.max_score();
    std::vector<double> values(static_cast<std::size_t>(top) + 2, 0.0);
    // tail counts: at_least[n] = sum of counts with score >= n
    std::int64_t at_least = 0;
    auto it = h.entries().rbegin();
    for (int n = top; n >= 0; --n) {
        while (it != h.entries().rend() && it->first == n) {
            at_least += it->second;
            ++it;
        }
        values[static_cast<std::size_t>(n)] =
            static_cast<double>(at_least) / static_cast<double>(h.total_innings());
    }
    values[0] = 1.0;
    return SurvivalCurve(std::move(values));
}

// Average points per inning. Equals the sum over n >= 1 of the
// empirical survival values.
inline double mean_score(const ScoreHistogram& h) {
    double points = 0.0;
    for (const auto& [score, count] : h.entries())
        points += static_cast<double>(score) * static_cast<double>(count);
    return points / static_cast<double>(h.total_innings());
}

// Entry-wise merge, e.g. pooling several players into a composite one.
inline ScoreHistogram composite(std::span<const ScoreHistogram> hs) {
    if (hs.empty()) throw ValidationError("composite of zero histograms");
    ScoreHistogram::Entries merged;
    for (const ScoreHistogram& h : hs)
        for (const auto& [score, count] : h.entries()) merged[score] += count;
    return ScoreHistogram(std::move(merged));
}

inline ScoreHistogram composite(std::initializer_list<ScoreHistogram> hs) {
    return composite(std::span<const ScoreHistogram>(hs.begin(), hs.size()));
}

// Score-sheet text for a histogram (the parse_histogram format).
inline std::string format_histogram(const ScoreHistogram& h) {
    std::string out;
    for (const auto& [score, count] : h.entries()) {
        out += std::to_string(score);
        out += ' ';
        out += std::to_string(count);
        out += '\n';
    }
    return out;
}

}  // namespace carom
