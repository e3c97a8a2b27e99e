/* Quantizer step search from an ADPCM encoder: index of the first table
   entry above the sample, 0 when none is. */
int testme(int n, int valeur, int t[])
{
  int i;
  for (i = 0; i < n; i++) {
    if (t[i] > valeur)
      return i;
  }
  return 0;
}
