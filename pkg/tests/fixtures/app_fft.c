/* Spectral transform stage only. */

static void fft_stage(float *xr, float *xi, const float *wr,
                      const float *wi, int half)
{
    int k;
    float tr;
    float ti;

    for (k = 0; k < half; k = k + 1) {
        tr = wr[k] * xr[k + half] - wi[k] * xi[k + half];
        ti = wr[k] * xi[k + half] + wi[k] * xr[k + half];
        xr[k + half] = xr[k] - tr;
        xi[k + half] = xi[k] - ti;
        xr[k] = xr[k] + tr;
        xi[k] = xi[k] + ti;
    }
}

int main(void)
{
    float xr[64];
    float xi[64];
    float wr[32];
    float wi[32];

    fft_stage(xr, xi, wr, wi, 32);
    return 0;
}
