#pragma once

#include <stdexcept>
#include <string>

namespace qnap
{
    /// Base class for every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Invalid parameters, malformed configuration or an invalid model.
    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    /// Internal inconsistency detected while simulating (e.g. an event
    /// scheduled in the past). Signals a bug in a transform or the kernel.
    class ModelError : public Error
    {
    public:
        using Error::Error;
    };

    /// A closed class can make no further progress.
    class DeadlockError : public Error
    {
    public:
        DeadlockError(std::string job_class, const std::string &what)
            : Error(what), job_class_(std::move(job_class))
        {
        }

        const std::string &job_class() const noexcept { return job_class_; }

    private:
        std::string job_class_;
    };

    /// Estimation requested on data that cannot support it.
    class StatsError : public Error
    {
    public:
        using Error::Error;
    };
} // namespace qnap
