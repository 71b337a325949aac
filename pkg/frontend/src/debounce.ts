// Trailing-edge debouncer: rapid calls collapse into one invocation with
// the latest argument after the quiet period.

export type Cancel = () => void

export function debounce<A>(fn: (arg: A) => void, waitMs: number): ((arg: A) => void) & { cancel: Cancel } {
  let timer: ReturnType<typeof setTimeout> | null = null
  const wrapped = (arg: A) => {
    if (timer !== null) clearTimeout(timer)
    timer = setTimeout(() => {
      timer = null
      fn(arg)
    }, waitMs)
  }
  wrapped.cancel = () => {
    if (timer !== null) {
      clearTimeout(timer)
      timer = null
    }
  }
  return wrapped
}
