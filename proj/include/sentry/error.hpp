#ifndef SENTRY_ERROR_HPP
#define SENTRY_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sentry
{

struct error : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Malformed input file (bad JSON, missing fields, wrong types).
struct parse_error : public error
{
    using error::error;
};

// Structurally invalid graph or artifact (cycle, dangling synapse, ...).
struct validation_error : public error
{
    using error::error;
};

// A sub-network exceeds every core configuration in the palette.
struct no_fit_error : public error
{
    using error::error;
};

}

#endif
