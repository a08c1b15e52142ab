#include "gridshaper/format.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gridshaper {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

double parse_double(std::string_view text, std::string_view what) {
    const std::string_view s = trim(text);
    double value = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value))
        throw std::invalid_argument(std::string(what) + ": not a number: '" + std::string(text) + "'");
    return value;
}

long long parse_integer(std::string_view text, std::string_view what) {
    const std::string_view s = trim(text);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument(std::string(what) + ": not an integer: '" + std::string(text) + "'");
    return value;
}

}  // namespace gridshaper
