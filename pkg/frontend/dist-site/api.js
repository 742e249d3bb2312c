// Typed client for the visualization service JSON API.
export class ApiError extends Error {
    status;
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function getJson(url, signal) {
    const resp = await fetch(url, { signal });
    if (!resp.ok) {
        let detail = resp.statusText;
        try {
            const body = (await resp.json());
            if (body.error)
                detail = body.error;
        }
        catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(resp.status, detail);
    }
    return (await resp.json());
}
export class ApiClient {
    baseUrl;
    constructor(baseUrl = "") {
        this.baseUrl = baseUrl;
    }
    hierarchy(signal) {
        return getJson(`${this.baseUrl}/api/hierarchy`, signal);
    }
    node(id, signal) {
        return getJson(`${this.baseUrl}/api/node/${id}`, signal);
    }
    layout(id, seed, signal) {
        const query = seed === undefined ? "" : `?seed=${seed}`;
        return getJson(`${this.baseUrl}/api/layout/${id}${query}`, signal);
    }
}
//# sourceMappingURL=api.js.map