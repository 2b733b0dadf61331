#pragma once

#include <stdexcept>
#include <utility>
#include <variant>

namespace hierva {

/// Value-or-error carrier for operations whose failures are ordinary data
/// (e.g. task validation feedback) rather than exceptional conditions.
template <typename T, typename E>
class Result {
public:
    Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

    bool ok() const { return v_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T& value() {
        if (!ok()) throw std::logic_error("Result: value() on error");
        return std::get<0>(v_);
    }
    const T& value() const {
        if (!ok()) throw std::logic_error("Result: value() on error");
        return std::get<0>(v_);
    }
    E& error() {
        if (ok()) throw std::logic_error("Result: error() on value");
        return std::get<1>(v_);
    }
    const E& error() const {
        if (ok()) throw std::logic_error("Result: error() on value");
        return std::get<1>(v_);
    }

private:
    std::variant<T, E> v_;
};

}  // namespace hierva
