#include <bkio/c_api.h>

#include <cstring>
#include <string>
#include <vector>

#include <bkio/reader.hpp>

struct bkio_file {
    bkio::Reader reader;
};

struct bkio_array {
    bkio::ColumnArray column;
};

namespace {

thread_local std::string last_error;
thread_local int last_code = BKIO_OK;

int fail(int code, const std::string& message)
{
    last_code = code;
    last_error = message;
    return -code;
}

void clear_error()
{
    last_code = BKIO_OK;
    last_error.clear();
}

int from_exception()
{
    try {
        throw;
    } catch (const bkio::Error& e) {
        return fail(static_cast<int>(e.code()) + 1, e.what());
    } catch (const std::exception& e) {
        return fail(BKIO_E_INTERNAL, e.what());
    } catch (...) {
        return fail(BKIO_E_INTERNAL, "unknown error");
    }
}

template <typename Fn>
auto guarded(Fn&& fn, decltype(fn()) on_error) -> decltype(fn())
{
    clear_error();
    try {
        return fn();
    } catch (...) {
        from_exception();
        return on_error;
    }
}

bool check_file(const bkio_file* file)
{
    if (file == nullptr) {
        fail(BKIO_E_INVALID_ARGUMENT, "file handle is NULL (closed or never opened)");
        return false;
    }
    return true;
}

bool check_array(const bkio_array* array)
{
    if (array == nullptr) {
        fail(BKIO_E_INVALID_ARGUMENT, "array handle is NULL");
        return false;
    }
    return true;
}

const bkio::BranchDescriptor* branch_of(const bkio_file* file, int32_t branch)
{
    if (!check_file(file)) {
        return nullptr;
    }
    const auto& branches = file->reader.branches();
    if (branch < 0 || static_cast<std::size_t>(branch) >= branches.size()) {
        fail(BKIO_E_OUT_OF_RANGE, "no branch with id " + std::to_string(branch));
        return nullptr;
    }
    return &branches[static_cast<std::size_t>(branch)];
}

std::vector<bkio::BranchId> to_ids(const int32_t* branches, std::size_t n)
{
    std::vector<bkio::BranchId> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (branches[i] < 0) {
            throw bkio::Error(bkio::ErrorCode::out_of_range, "negative branch id");
        }
        ids.push_back(static_cast<bkio::BranchId>(branches[i]));
    }
    return ids;
}

} // namespace

static_assert(static_cast<int>(bkio::ErrorCode::io_failure) + 1 == BKIO_E_IO_FAILURE);

extern "C" {

const char* bkio_last_error(void) { return last_error.c_str(); }
int bkio_last_error_code(void) { return last_code; }

bkio_file* bkio_open(const char* path, int prefetch, unsigned threads)
{
    if (path == nullptr) {
        fail(BKIO_E_INVALID_ARGUMENT, "path is NULL");
        return nullptr;
    }
    return guarded(
        [&]() -> bkio_file* {
            bkio::ReaderOptions options;
            options.prefetch = prefetch != 0;
            options.prefetch_config.workers = threads;
            return new bkio_file{bkio::Reader::open(path, std::move(options))};
        },
        nullptr);
}

void bkio_close(bkio_file* file) { delete file; }

int64_t bkio_entry_count(const bkio_file* file)
{
    clear_error();
    return check_file(file) ? static_cast<int64_t>(file->reader.total_entries()) : -last_code;
}

int32_t bkio_branch_count(const bkio_file* file)
{
    clear_error();
    return check_file(file) ? static_cast<int32_t>(file->reader.branches().size()) : -last_code;
}

const char* bkio_branch_name(const bkio_file* file, int32_t branch)
{
    clear_error();
    const auto* b = branch_of(file, branch);
    return b != nullptr ? b->name.c_str() : nullptr;
}

int32_t bkio_branch_element(const bkio_file* file, int32_t branch)
{
    clear_error();
    const auto* b = branch_of(file, branch);
    return b != nullptr ? static_cast<int32_t>(b->element) : -last_code;
}

int32_t bkio_branch_shape(const bkio_file* file, int32_t branch)
{
    clear_error();
    const auto* b = branch_of(file, branch);
    return b != nullptr ? static_cast<int32_t>(b->shape.kind) : -last_code;
}

int32_t bkio_branch_fixed_len(const bkio_file* file, int32_t branch)
{
    clear_error();
    const auto* b = branch_of(file, branch);
    return b != nullptr ? static_cast<int32_t>(b->shape.fixed_len) : -last_code;
}

int32_t bkio_find_branch(const bkio_file* file, const char* name)
{
    clear_error();
    if (!check_file(file)) {
        return -last_code;
    }
    if (name == nullptr) {
        return fail(BKIO_E_INVALID_ARGUMENT, "name is NULL");
    }
    return guarded([&] { return static_cast<int32_t>(file->reader.branch_id(name)); }, int32_t{-1});
}

int bkio_read_range(bkio_file* file, const int32_t* branches, size_t n, uint64_t begin, uint64_t end, int force_copy,
                    bkio_array** out)
{
    clear_error();
    if (!check_file(file)) {
        return -last_code;
    }
    if ((n > 0 && (branches == nullptr || out == nullptr))) {
        return fail(BKIO_E_INVALID_ARGUMENT, "branches and out must be non-NULL");
    }
    const int rc = guarded(
        [&] {
            const auto ids = to_ids(branches, n);
            auto columns = file->reader.read_range_aligned(ids, begin, end, force_copy != 0);
            for (std::size_t i = 0; i < columns.size(); ++i) {
                out[i] = new bkio_array{std::move(columns[i])};
            }
            return 0;
        },
        -1);
    return rc == 0 ? 0 : -last_code;
}

const void* bkio_array_data(const bkio_array* array)
{
    clear_error();
    if (!check_array(array)) {
        return nullptr;
    }
    return guarded(
        [&]() -> const void* {
            return std::visit(
                [&](const auto& typed) -> const void* {
                    using T = typename std::decay_t<decltype(typed)>::value_type;
                    return array->column.values<T>().data();
                },
                bkio::make_native_array(array->column.element()));
        },
        nullptr);
}

uint64_t bkio_array_length(const bkio_array* array)
{
    clear_error();
    return check_array(array) ? array->column.entry_count() * array->column.values_per_entry() : 0;
}

uint64_t bkio_array_entries(const bkio_array* array)
{
    clear_error();
    return check_array(array) ? array->column.entry_count() : 0;
}

int32_t bkio_array_element(const bkio_array* array)
{
    clear_error();
    return check_array(array) ? static_cast<int32_t>(array->column.element()) : -last_code;
}

int bkio_array_is_view(const bkio_array* array)
{
    clear_error();
    return check_array(array) ? (array->column.ownership() == bkio::Ownership::view ? 1 : 0) : -last_code;
}

int bkio_array_is_valid(const bkio_array* array)
{
    clear_error();
    return check_array(array) ? (array->column.is_valid() ? 1 : 0) : -last_code;
}

void bkio_array_free(bkio_array* array) { delete array; }

int64_t bkio_get_entry_f64(bkio_file* file, const int32_t* branches, size_t n, uint64_t entry, double* out,
                           size_t capacity)
{
    clear_error();
    if (!check_file(file)) {
        return -last_code;
    }
    if (n > 0 && branches == nullptr) {
        return fail(BKIO_E_INVALID_ARGUMENT, "branches is NULL");
    }
    const auto written = guarded(
        [&]() -> int64_t {
            const auto ids = to_ids(branches, n);
            const auto proxy = file->reader.get_entry(ids, entry);
            std::size_t total = 0;
            for (std::size_t f = 0; f < proxy.size(); ++f) {
                total += proxy.length(f);
            }
            if (total > capacity || (total > 0 && out == nullptr)) {
                throw bkio::Error(bkio::ErrorCode::size_mismatch, "entry has " + std::to_string(total)
                                                                      + " values, buffer holds "
                                                                      + std::to_string(capacity));
            }
            std::size_t at = 0;
            for (std::size_t f = 0; f < proxy.size(); ++f) {
                for (std::size_t k = 0; k < proxy.length(f); ++k) {
                    out[at++] = proxy.as_double(f, k);
                }
            }
            return static_cast<int64_t>(total);
        },
        int64_t{-1});
    return written >= 0 ? written : -last_code;
}

int bkio_evict(bkio_file* file)
{
    clear_error();
    if (!check_file(file)) {
        return -last_code;
    }
    file->reader.evict_all();
    return 0;
}

} // extern "C"
